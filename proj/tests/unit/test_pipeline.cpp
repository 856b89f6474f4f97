#include "doctest.h"
#include "tauw/pipeline.hpp"

using namespace tauw;
using namespace tauw::pipeline;

namespace {

simgen::ScenarioConfig small_config() {
  simgen::ScenarioConfig config;
  config.n_series = 300;
  config.series_length = 12;
  config.n_classes = 5;
  config.base_curve.assign(12, 0.0);
  for (int t = 0; t < 12; ++t) config.base_curve[t] = 0.12 - 0.007 * t;
  config.error_correlation = 0.7;
  config.varying_change_prob = 0.3;
  config.subsample_length = 6;
  config.deficits = {
      {"rain", {1.0, 1.8, 3.0, 5.0}, {0.7, 0.12, 0.1, 0.08}, false},
      {"blur", {1.0, 1.5, 2.5, 4.0}, {0.6, 0.2, 0.12, 0.08}, true},
  };
  config.seed = 11;
  return config;
}

}  // namespace

TEST_CASE("parse_taqf_subset normalizes and validates") {
  CHECK(parse_taqf_subset("") == std::vector<std::string>{});
  CHECK(parse_taqf_subset("ratio,certainty") ==
        std::vector<std::string>{"ratio", "certainty"});
  // canonical order regardless of the user's order
  CHECK(parse_taqf_subset("certainty,ratio") ==
        std::vector<std::string>{"ratio", "certainty"});
  CHECK(parse_taqf_subset("certainty,size,length,ratio") ==
        std::vector<std::string>{"ratio", "length", "size", "certainty"});
  CHECK_THROWS_AS(parse_taqf_subset("ratio,bogus"), ConfigError);
  CHECK_THROWS_AS(parse_taqf_subset("ratio,ratio"), ConfigError);
}

TEST_CASE("mode parsing") {
  CHECK(fusion_mode_from_string("none") == FusionMode::none);
  CHECK(fusion_mode_from_string("if") == FusionMode::fused);
  CHECK_THROWS_AS(fusion_mode_from_string("fused"), ConfigError);
  CHECK(uf_mode_from_string("tauw") == UfMode::tauw);
  CHECK(uf_mode_from_string("worstcase") == UfMode::worstcase);
  CHECK_THROWS_AS(uf_mode_from_string("max"), ConfigError);
}

TEST_CASE("simulate produces tagged, subsampled, valid splits") {
  const SimulatedData data = simulate(small_config(), 11);
  CHECK(data.train.split == Split::train);
  CHECK(data.calibration.split == Split::calibration);
  CHECK(data.test.split == Split::test);
  CHECK(data.train.series.size() == 120);
  CHECK(data.calibration.series.size() == 90);
  CHECK(data.test.series.size() == 90);
  for (const auto& ts : data.train.series) CHECK(ts.steps.size() == 12);
  for (const auto& ts : data.calibration.series) CHECK(ts.steps.size() == 6);
  for (const auto& ts : data.test.series) CHECK(ts.steps.size() == 6);
  CHECK(validate_dataset(data.train).empty());
  CHECK(validate_dataset(data.calibration).empty());
  CHECK(validate_dataset(data.test).empty());
}

TEST_CASE("condition cases pick the right uncertainty and label streams") {
  const SimulatedData data = simulate(small_config(), 11);
  const qim::QimParams params{8, 60, 0.999};
  const std::vector<std::string> all = {"ratio", "length", "size", "certainty"};
  const Models models = fit(data.train, data.calibration, params, all);
  const auto replays = wrapper::replay_dataset(data.test, models.stateless, &models.tauw);

  CHECK_THROWS_AS(condition_cases(replays, FusionMode::none, UfMode::naive), ConfigError);

  const auto isolated = condition_cases(replays, FusionMode::none, UfMode::none);
  const auto fused_none = condition_cases(replays, FusionMode::fused, UfMode::none);
  const auto fused_tauw = condition_cases(replays, FusionMode::fused, UfMode::tauw);
  const auto fused_naive = condition_cases(replays, FusionMode::fused, UfMode::naive);
  REQUIRE(isolated.size() == fused_none.size());
  REQUIRE(isolated.size() == static_cast<std::size_t>(data.test.step_count()));

  std::size_t i = 0;
  for (const auto& replay : replays) {
    for (const auto& step : replay.steps) {
      CHECK(isolated[i].predicted_uncertainty == step.u_step);
      CHECK(isolated[i].failed == step.isolated_failed);
      CHECK(fused_none[i].predicted_uncertainty == step.u_step);
      CHECK(fused_none[i].failed == step.fused_failed);
      CHECK(fused_tauw[i].predicted_uncertainty == step.u_ta);
      CHECK(fused_naive[i].predicted_uncertainty == step.u_naive);
      ++i;
    }
  }
}

TEST_CASE("empty-subset importance row equals the stateless-feature ta model") {
  const SimulatedData data = simulate(small_config(), 11);
  const qim::QimParams params{8, 60, 0.999};
  const Models models = fit(data.train, data.calibration, params, {});

  const auto rows = eval::feature_importance_study(data.train, data.calibration, data.test,
                                                   models.stateless, params);
  REQUIRE(rows.size() == 16);
  double empty_row = -1.0;
  for (const auto& row : rows) {
    if (!row.ratio && !row.length && !row.size && !row.certainty) empty_row = row.brier;
  }

  const auto replays = wrapper::replay_dataset(data.test, models.stateless, &models.tauw);
  const auto cases = condition_cases(replays, FusionMode::fused, UfMode::tauw);
  CHECK(eval::brier_score(cases) == doctest::Approx(empty_row).epsilon(1e-12));
}
