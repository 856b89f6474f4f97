#include <cmath>

#include "doctest.h"
#include "tauw/eval.hpp"
#include "tauw/rng.hpp"

using namespace tauw;
using namespace tauw::eval;

namespace {

std::vector<ScoredCase> cases_of(std::initializer_list<std::pair<double, bool>> data) {
  std::vector<ScoredCase> cases;
  for (const auto& [u, failed] : data) cases.push_back({u, failed});
  return cases;
}

}  // namespace

TEST_CASE("brier score examples") {
  CHECK(brier_score(cases_of({{0, false}, {0, false}, {0, false}})) == doctest::Approx(0.0));
  CHECK(brier_score(cases_of({{1, false}})) == doctest::Approx(1.0));
  CHECK(brier_score(cases_of({{0.2, false}, {0.2, true}, {0.8, true}})) == doctest::Approx(0.24));
  CHECK_THROWS_AS(brier_score({}), DomainError);
  CHECK_THROWS_AS(brier_score(cases_of({{1.5, false}})), DomainError);
}

TEST_CASE("decompose examples") {
  {
    const auto d = decompose(cases_of({{0, false}, {0, false}, {1, true}, {1, true}}));
    CHECK(d.variance == doctest::Approx(0.25));
    CHECK(d.resolution == doctest::Approx(0.25));
    CHECK(d.unreliability == doctest::Approx(0.0));
  }
  {
    const auto d = decompose(cases_of({{0.5, false}, {0.5, true}, {0.5, false}, {0.5, true}}));
    CHECK(d.variance == doctest::Approx(0.25));
    CHECK(d.resolution == doctest::Approx(0.0));
    CHECK(d.unreliability == doctest::Approx(0.0));
  }
  {
    const auto cases = cases_of({{0.2, false}, {0.2, true}, {0.8, true}});
    const auto d = decompose(cases);
    CHECK(d.variance == doctest::Approx(0.22222).epsilon(1e-4));
    CHECK(d.resolution == doctest::Approx(0.05556).epsilon(1e-3));
    CHECK(d.unreliability == doctest::Approx(0.07333).epsilon(1e-3));
    CHECK(d.variance - d.resolution + d.unreliability == doctest::Approx(brier_score(cases)));
  }
}

TEST_CASE("confidence split examples") {
  {
    const auto split = confidence_split(cases_of({{0, false}, {0, false}, {1, true}, {1, true}}));
    CHECK(split.overconfidence == doctest::Approx(0.0));
    CHECK(split.underconfidence == doctest::Approx(0.0));
  }
  {
    const auto split = confidence_split(cases_of({{0.2, false}, {0.2, true}, {0.8, true}}));
    CHECK(split.overconfidence == doctest::Approx(0.07333).epsilon(1e-3));
    CHECK(split.underconfidence == doctest::Approx(0.0));
  }
  {
    const auto split = confidence_split(cases_of({{0.9, false}, {0.9, false}}));
    CHECK(split.overconfidence == doctest::Approx(0.0));
    CHECK(split.underconfidence == doctest::Approx(0.81));
  }
}

TEST_CASE("decomposition identity on random case sets") {
  Rng rng(41);
  for (int iter = 0; iter < 300; ++iter) {
    const int n_values = 1 + static_cast<int>(rng.below(12));
    std::vector<double> values;
    for (int i = 0; i < n_values; ++i) values.push_back(rng.uniform01());
    std::vector<ScoredCase> cases;
    const int n = 10 + static_cast<int>(rng.below(400));
    for (int i = 0; i < n; ++i) {
      const double u = values[rng.below(values.size())];
      cases.push_back({u, rng.bernoulli(0.5 * u + 0.2)});
    }
    const double bs = brier_score(cases);
    const auto d = decompose(cases);
    const auto split = confidence_split(cases);
    CHECK(std::abs(bs - (d.variance - d.resolution + d.unreliability)) < 1e-9);
    CHECK(std::abs(d.unreliability - (split.overconfidence + split.underconfidence)) < 1e-12);
  }
}

TEST_CASE("variance depends only on the failure rate") {
  Rng rng(43);
  std::vector<ScoredCase> a, b;
  for (int i = 0; i < 1000; ++i) {
    const bool failed = i < 300;
    a.push_back({rng.uniform01(), failed});
    b.push_back({rng.uniform01() * 0.2, failed});
  }
  const auto da = decompose(a);
  const auto db = decompose(b);
  CHECK(da.variance == doctest::Approx(db.variance));
  CHECK(da.variance == doctest::Approx(0.3 * 0.7));
}

TEST_CASE("variance anchor: 7.89% failure rate gives 0.0727") {
  std::vector<ScoredCase> cases;
  for (int i = 0; i < 10000; ++i) cases.push_back({0.1, i < 789});
  const auto d = decompose(cases);
  CHECK(std::abs(d.variance - 0.07267) < 1e-4);
  CHECK(std::abs(d.variance - 0.0726) < 0.0005);
}

TEST_CASE("fixed-width fallback binning also satisfies the split identity") {
  Rng rng(47);
  std::vector<ScoredCase> cases;
  for (int i = 0; i < 500; ++i) {
    const double u = rng.uniform01();
    cases.push_back({u, rng.bernoulli(u)});
  }
  const auto d = decompose(cases, Binning::fixed_width_100);
  const auto split = confidence_split(cases, Binning::fixed_width_100);
  CHECK(std::abs(d.unreliability - (split.overconfidence + split.underconfidence)) < 1e-12);
}

TEST_CASE("calibration deciles examples") {
  {
    std::vector<ScoredCase> cases(10, {0.0, false});
    const auto points = calibration_deciles(cases);
    for (const auto& p : points) {
      CHECK(p.mean_certainty == doctest::Approx(1.0));
      CHECK(p.accuracy == doctest::Approx(1.0));
    }
  }
  {
    std::vector<ScoredCase> cases;
    for (int i = 0; i < 10; ++i) {
      cases.push_back({0.1, false});
      cases.push_back({0.9, true});
    }
    const auto points = calibration_deciles(cases);
    // sorted by certainty ascending: wrong u=0.9 cases first
    CHECK(points[0].mean_certainty == doctest::Approx(0.1));
    CHECK(points[0].accuracy == doctest::Approx(0.0));
    CHECK(points[9].mean_certainty == doctest::Approx(0.9));
    CHECK(points[9].accuracy == doctest::Approx(1.0));
  }
  std::vector<ScoredCase> too_few(9, {0.5, false});
  CHECK_THROWS_AS(calibration_deciles(too_few), DomainError);
}

TEST_CASE("calibration deciles spread the remainder over the earliest groups") {
  // 23 cases with certainties k/23 for k = 1..23 -> group sizes 3,3,3,2,...,2
  std::vector<ScoredCase> cases;
  for (int k = 1; k <= 23; ++k) cases.push_back({1.0 - k / 23.0, false});
  const auto points = calibration_deciles(cases);
  CHECK(points[0].mean_certainty == doctest::Approx((1 + 2 + 3) / 3.0 / 23.0));
  CHECK(points[2].mean_certainty == doctest::Approx((7 + 8 + 9) / 3.0 / 23.0));
  CHECK(points[3].mean_certainty == doctest::Approx((10 + 11) / 2.0 / 23.0));
  CHECK(points[9].mean_certainty == doctest::Approx((22 + 23) / 2.0 / 23.0));
}

TEST_CASE("calibration deciles of a calibrated forecaster sit on the diagonal") {
  Rng rng(53);
  const std::vector<double> levels = {0.05, 0.2, 0.4, 0.6, 0.8, 0.95};
  std::vector<ScoredCase> cases;
  for (int i = 0; i < 10000; ++i) {
    const double u = levels[rng.below(levels.size())];
    cases.push_back({u, rng.bernoulli(u)});
  }
  const auto points = calibration_deciles(cases);
  for (const auto& p : points) {
    const double expected_accuracy = p.mean_certainty;
    const double sigma = std::sqrt(expected_accuracy * (1 - expected_accuracy) / 1000.0);
    CHECK(std::abs(p.accuracy - expected_accuracy) <= 3.0 * std::max(sigma, 1e-3));
  }
}

TEST_CASE("misclassification by step") {
  {
    std::vector<std::vector<StepOutcome>> series(3, std::vector<StepOutcome>(4));
    const auto curve = misclassification_by_step(series);
    for (double rate : curve.isolated) CHECK(rate == doctest::Approx(0.0));
    for (double rate : curve.fused) CHECK(rate == doctest::Approx(0.0));
  }
  {
    // one series: isolated wrong,right,right; fused recovers from step 2 on
    std::vector<std::vector<StepOutcome>> series = {
        {{true, true}, {false, false}, {false, false}}};
    const auto curve = misclassification_by_step(series);
    CHECK(curve.isolated == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(curve.fused == std::vector<double>{1.0, 0.0, 0.0});
  }
  std::vector<std::vector<StepOutcome>> ragged = {{{false, false}},
                                                  {{false, false}, {false, false}}};
  CHECK_THROWS_AS(misclassification_by_step(ragged), DomainError);
}

TEST_CASE("uncertainty distribution") {
  {
    std::vector<ScoredCase> cases(20, {0.05, false});
    const auto summary = uncertainty_distribution(cases);
    CHECK(summary.guaranteed_min_uncertainty == doctest::Approx(0.05));
    CHECK(summary.fraction_at_min == doctest::Approx(1.0));
    CHECK(summary.histogram[5] == 20);
  }
  {
    std::vector<ScoredCase> cases;
    for (int i = 0; i < 30; ++i) cases.push_back({0.01, false});
    for (int i = 0; i < 70; ++i) cases.push_back({0.2, false});
    const auto summary = uncertainty_distribution(cases);
    CHECK(summary.guaranteed_min_uncertainty == doctest::Approx(0.01));
    CHECK(summary.fraction_at_min == doctest::Approx(0.3));
    CHECK(summary.histogram[1] == 30);
    CHECK(summary.histogram[20] == 70);
  }
}

TEST_CASE("report json round trip") {
  Rng rng(59);
  std::vector<ScoredCase> cases;
  for (int i = 0; i < 200; ++i) {
    const double u = 0.05 + 0.1 * static_cast<double>(rng.below(5));
    cases.push_back({u, rng.bernoulli(u)});
  }
  const EvaluationReport report = evaluate_cases(cases);
  CHECK(std::abs(report.brier - (report.variance - report.resolution + report.unreliability)) <
        1e-9);
  CHECK(std::abs(report.unspecificity - (report.variance - report.resolution)) < 1e-12);
  CHECK(std::abs(report.unreliability - (report.overconfidence + report.underconfidence)) < 1e-12);
  const std::string text = report_to_json_string(report);
  const EvaluationReport back = report_from_json_string(text);
  CHECK(back.brier == report.brier);
  CHECK(back.n_cases == report.n_cases);
  CHECK(back.calibration_deciles[3].mean_certainty ==
        report.calibration_deciles[3].mean_certainty);
  CHECK(report_to_json_string(back) == text);
}

TEST_CASE("csv renderings") {
  std::array<DecilePoint, 10> deciles{};
  for (int i = 0; i < 10; ++i) deciles[i] = {0.1 * i, 0.1 * i};
  const std::string csv = deciles_csv(deciles);
  CHECK(csv.rfind("decile,mean_certainty,accuracy\n", 0) == 0);
  CHECK(csv.find("10,0.9,0.9") != std::string::npos);

  MisclassCurve curve;
  curve.isolated = {0.1, 0.05};
  curve.fused = {0.1, 0.02};
  const std::string mcsv = misclass_csv(curve);
  CHECK(mcsv.find("step,isolated_rate,fused_rate\n") == 0);
  CHECK(mcsv.find("2,0.05,0.02") != std::string::npos);

  std::vector<ImportanceRow> rows = {{false, false, false, false, 0.0498},
                                     {true, false, false, true, 0.0356}};
  const std::string icsv = importance_csv(rows);
  CHECK(icsv.find("ratio,length,size,certainty,brier\n") == 0);
  CHECK(icsv.find("1,0,0,1,0.0356") != std::string::npos);
}
