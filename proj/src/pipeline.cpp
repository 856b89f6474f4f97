#include "tauw/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "tauw/rng.hpp"

namespace tauw::pipeline {

namespace {

constexpr std::uint64_t kSubsampleStream = 3;

void subsample_all(Dataset& dataset, int target_length, std::uint64_t seed) {
  for (std::size_t i = 0; i < dataset.series.size(); ++i) {
    const std::uint64_t series_seed =
        splitmix64(splitmix64(seed ^ splitmix64(kSubsampleStream)) + i);
    dataset.series[i] = simgen::subsample_series(dataset.series[i], target_length, series_seed);
  }
}

std::vector<qim::TrainingRow> stateless_rows(const Dataset& dataset) {
  std::vector<qim::TrainingRow> rows;
  rows.reserve(static_cast<std::size_t>(dataset.step_count()));
  for (const auto& series : dataset.series) {
    for (const auto& rec : series.steps) {
      rows.push_back({rec.qf, rec.outcome != rec.truth});
    }
  }
  return rows;
}

}  // namespace

SimulatedData simulate(const simgen::ScenarioConfig& config, std::uint64_t seed) {
  simgen::GeneratedDataset generated = simgen::generate(config, seed);
  auto splits = simgen::split_dataset(generated.dataset, config.split_fractions, seed);
  SimulatedData data{std::move(splits[0]), std::move(splits[1]), std::move(splits[2])};
  if (config.subsample_length > 0) {
    subsample_all(data.calibration, config.subsample_length, seed);
    subsample_all(data.test, config.subsample_length, seed);
  }
  return data;
}

std::vector<std::string> parse_taqf_subset(const std::string& csv) {
  std::vector<std::string> subset;
  std::stringstream stream(csv);
  std::string token;
  while (std::getline(stream, token, ',')) {
    if (token.empty()) continue;
    const bool known = std::find(wrapper::kTaqfNames.begin(), wrapper::kTaqfNames.end(),
                                 token) != wrapper::kTaqfNames.end();
    if (!known) throw ConfigError("unknown taQF feature: " + token);
    if (std::find(subset.begin(), subset.end(), token) != subset.end()) {
      throw ConfigError("duplicate taQF feature: " + token);
    }
    subset.push_back(token);
  }
  // Canonical order regardless of how the user listed them.
  std::sort(subset.begin(), subset.end(), [](const std::string& a, const std::string& b) {
    const auto pos = [](const std::string& name) {
      return std::find(wrapper::kTaqfNames.begin(), wrapper::kTaqfNames.end(), name) -
             wrapper::kTaqfNames.begin();
    };
    return pos(a) < pos(b);
  });
  return subset;
}

Models fit(const Dataset& train, const Dataset& calibration, const qim::QimParams& params,
           std::span<const std::string> taqf_subset) {
  if (train.qf_schema != calibration.qf_schema) {
    throw SchemaError("train and calibration datasets have different QF schemas");
  }

  const std::vector<std::string> qf_names = train.qf_schema.names();
  auto stateless_fit = qim::fit_tree(stateless_rows(train), params.max_depth);
  qim::CalibratedTree stateless =
      qim::calibrate_tree(std::move(stateless_fit), stateless_rows(calibration), qf_names,
                          params.min_leaf, params.confidence);

  std::vector<std::string> ta_names = qf_names;
  for (const std::string& name : taqf_subset) ta_names.push_back(name);

  const wrapper::TaTable train_table = wrapper::build_ta_training_table(train, stateless);
  const wrapper::TaTable cal_table = wrapper::build_ta_training_table(calibration, stateless);
  const wrapper::TaTable train_sel = wrapper::project_table(train_table, ta_names);
  const wrapper::TaTable cal_sel = wrapper::project_table(cal_table, ta_names);

  auto ta_fit = qim::fit_tree(train_sel.rows, params.max_depth);
  qim::CalibratedTree tauw = qim::calibrate_tree(std::move(ta_fit), cal_sel.rows, ta_names,
                                                 params.min_leaf, params.confidence);

  return {std::move(stateless), std::move(tauw)};
}

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "none") return FusionMode::none;
  if (s == "if") return FusionMode::fused;
  throw ConfigError("unknown fusion mode: " + s + " (expected none|if)");
}

UfMode uf_mode_from_string(const std::string& s) {
  if (s == "none") return UfMode::none;
  if (s == "naive") return UfMode::naive;
  if (s == "opportune") return UfMode::opportune;
  if (s == "worstcase") return UfMode::worstcase;
  if (s == "tauw") return UfMode::tauw;
  throw ConfigError("unknown uf mode: " + s + " (expected none|naive|opportune|worstcase|tauw)");
}

std::vector<eval::ScoredCase> condition_cases(std::span<const wrapper::SeriesReplay> replays,
                                              FusionMode fusion, UfMode uf) {
  if (fusion == FusionMode::none && uf != UfMode::none) {
    throw ConfigError("uncertainty fusion requires information fusion (--fusion if)");
  }
  std::vector<eval::ScoredCase> cases;
  for (const auto& replay : replays) {
    for (const auto& step : replay.steps) {
      eval::ScoredCase c;
      if (fusion == FusionMode::none) {
        c = {step.u_step, step.isolated_failed};
      } else {
        switch (uf) {
          case UfMode::none: c = {step.u_step, step.fused_failed}; break;
          case UfMode::naive: c = {step.u_naive, step.fused_failed}; break;
          case UfMode::opportune: c = {step.u_opportune, step.fused_failed}; break;
          case UfMode::worstcase: c = {step.u_worstcase, step.fused_failed}; break;
          case UfMode::tauw: c = {step.u_ta, step.fused_failed}; break;
        }
      }
      cases.push_back(c);
    }
  }
  return cases;
}

std::vector<std::vector<eval::StepOutcome>> step_outcomes(
    std::span<const wrapper::SeriesReplay> replays) {
  std::vector<std::vector<eval::StepOutcome>> out;
  out.reserve(replays.size());
  for (const auto& replay : replays) {
    std::vector<eval::StepOutcome> series;
    series.reserve(replay.steps.size());
    for (const auto& step : replay.steps) {
      series.push_back({step.isolated_failed, step.fused_failed});
    }
    out.push_back(std::move(series));
  }
  return out;
}

}  // namespace tauw::pipeline
