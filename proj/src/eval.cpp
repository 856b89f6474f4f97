#include "tauw/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "tauw/wrapper.hpp"

namespace tauw::eval {

using nlohmann::json;

namespace {

void check_cases(std::span<const ScoredCase> cases) {
  if (cases.empty()) throw DomainError("scored cases must be non-empty");
  for (const auto& c : cases) {
    if (!(c.predicted_uncertainty >= 0.0 && c.predicted_uncertainty <= 1.0)) {
      throw DomainError("predicted uncertainty must lie in [0,1]");
    }
  }
}

struct Bin {
  double forecast_sum = 0.0;
  std::int64_t failures = 0;
  std::int64_t count = 0;
};

// Bins in ascending forecast order so every aggregate is summed in one
// deterministic order.
std::map<double, Bin> make_bins(std::span<const ScoredCase> cases, Binning binning) {
  std::map<double, Bin> bins;
  for (const auto& c : cases) {
    double key = c.predicted_uncertainty;
    if (binning == Binning::fixed_width_100) {
      key = std::min(99.0, std::floor(c.predicted_uncertainty * 100.0)) / 100.0;
    }
    Bin& b = bins[key];
    b.forecast_sum += c.predicted_uncertainty;
    b.failures += c.failed ? 1 : 0;
    b.count += 1;
  }
  return bins;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

double brier_score(std::span<const ScoredCase> cases) {
  check_cases(cases);
  double sum = 0.0;
  for (const auto& c : cases) {
    const double diff = c.predicted_uncertainty - (c.failed ? 1.0 : 0.0);
    sum += diff * diff;
  }
  return sum / static_cast<double>(cases.size());
}

Decomposition decompose(std::span<const ScoredCase> cases, Binning binning) {
  check_cases(cases);
  const double n = static_cast<double>(cases.size());
  std::int64_t failures = 0;
  for (const auto& c : cases) failures += c.failed ? 1 : 0;
  const double base_rate = static_cast<double>(failures) / n;

  Decomposition d;
  d.variance = base_rate * (1.0 - base_rate);
  for (const auto& [key, bin] : make_bins(cases, binning)) {
    const double w = static_cast<double>(bin.count) / n;
    const double bin_rate = static_cast<double>(bin.failures) / static_cast<double>(bin.count);
    const double bin_forecast = bin.forecast_sum / static_cast<double>(bin.count);
    d.resolution += w * (bin_rate - base_rate) * (bin_rate - base_rate);
    d.unreliability += w * (bin_forecast - bin_rate) * (bin_forecast - bin_rate);
  }
  return d;
}

ConfidenceSplit confidence_split(std::span<const ScoredCase> cases, Binning binning) {
  check_cases(cases);
  const double n = static_cast<double>(cases.size());
  ConfidenceSplit split;
  for (const auto& [key, bin] : make_bins(cases, binning)) {
    const double w = static_cast<double>(bin.count) / n;
    const double bin_rate = static_cast<double>(bin.failures) / static_cast<double>(bin.count);
    const double bin_forecast = bin.forecast_sum / static_cast<double>(bin.count);
    const double term = w * (bin_forecast - bin_rate) * (bin_forecast - bin_rate);
    if (bin_forecast < bin_rate) {
      split.overconfidence += term;
    } else if (bin_forecast > bin_rate) {
      split.underconfidence += term;
    }
  }
  return split;
}

std::array<DecilePoint, 10> calibration_deciles(std::span<const ScoredCase> cases) {
  check_cases(cases);
  if (cases.size() < 10) throw DomainError("calibration_deciles: need at least 10 cases");

  std::vector<std::size_t> order(cases.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Stable sort on (certainty, original index) keeps group boundaries
  // deterministic under ties.
  std::stable_sort(order.begin(), order.end(), [&cases](std::size_t a, std::size_t b) {
    return (1.0 - cases[a].predicted_uncertainty) < (1.0 - cases[b].predicted_uncertainty);
  });

  const std::size_t n = cases.size();
  const std::size_t base = n / 10;
  const std::size_t remainder = n % 10;

  std::array<DecilePoint, 10> points{};
  std::size_t pos = 0;
  for (std::size_t g = 0; g < 10; ++g) {
    const std::size_t size = base + (g < remainder ? 1 : 0);
    double certainty_sum = 0.0;
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < size; ++i) {
      const ScoredCase& c = cases[order[pos++]];
      certainty_sum += 1.0 - c.predicted_uncertainty;
      correct += c.failed ? 0 : 1;
    }
    points[g] = {certainty_sum / static_cast<double>(size),
                 static_cast<double>(correct) / static_cast<double>(size)};
  }
  return points;
}

MisclassCurve misclassification_by_step(
    const std::vector<std::vector<StepOutcome>>& per_series) {
  if (per_series.empty()) throw DomainError("misclassification_by_step: no series");
  const std::size_t length = per_series.front().size();
  if (length == 0) throw DomainError("misclassification_by_step: empty series");
  for (const auto& series : per_series) {
    if (series.size() != length) {
      throw DomainError("misclassification_by_step: series lengths are ragged");
    }
  }
  MisclassCurve curve;
  curve.isolated.resize(length, 0.0);
  curve.fused.resize(length, 0.0);
  for (const auto& series : per_series) {
    for (std::size_t t = 0; t < length; ++t) {
      curve.isolated[t] += series[t].isolated_failed ? 1.0 : 0.0;
      curve.fused[t] += series[t].fused_failed ? 1.0 : 0.0;
    }
  }
  const double n = static_cast<double>(per_series.size());
  for (std::size_t t = 0; t < length; ++t) {
    curve.isolated[t] /= n;
    curve.fused[t] /= n;
  }
  return curve;
}

UncertaintySummary uncertainty_distribution(std::span<const ScoredCase> cases) {
  check_cases(cases);
  UncertaintySummary summary;
  summary.guaranteed_min_uncertainty = cases.front().predicted_uncertainty;
  for (const auto& c : cases) {
    summary.guaranteed_min_uncertainty =
        std::min(summary.guaranteed_min_uncertainty, c.predicted_uncertainty);
    const int bin = static_cast<int>(
        std::min(99.0, std::floor(c.predicted_uncertainty * 100.0)));
    summary.histogram[bin] += 1;
  }
  std::int64_t at_min = 0;
  for (const auto& c : cases) {
    if (c.predicted_uncertainty == summary.guaranteed_min_uncertainty) ++at_min;
  }
  summary.fraction_at_min = static_cast<double>(at_min) / static_cast<double>(cases.size());
  return summary;
}

EvaluationReport evaluate_cases(std::span<const ScoredCase> cases) {
  EvaluationReport report;
  report.brier = brier_score(cases);
  const Decomposition d = decompose(cases);
  report.variance = d.variance;
  report.resolution = d.resolution;
  report.unreliability = d.unreliability;
  report.unspecificity = d.variance - d.resolution;
  const ConfidenceSplit split = confidence_split(cases);
  report.overconfidence = split.overconfidence;
  report.underconfidence = split.underconfidence;
  report.n_cases = static_cast<std::int64_t>(cases.size());
  report.calibration_deciles = calibration_deciles(cases);
  const UncertaintySummary summary = uncertainty_distribution(cases);
  report.guaranteed_min_uncertainty = summary.guaranteed_min_uncertainty;
  report.fraction_at_min = summary.fraction_at_min;
  return report;
}

std::string report_to_json_string(const EvaluationReport& report) {
  json deciles = json::array();
  for (const auto& p : report.calibration_deciles) {
    deciles.push_back({{"mean_certainty", p.mean_certainty}, {"accuracy", p.accuracy}});
  }
  json j = {{"brier", report.brier},
            {"variance", report.variance},
            {"resolution", report.resolution},
            {"unspecificity", report.unspecificity},
            {"unreliability", report.unreliability},
            {"overconfidence", report.overconfidence},
            {"underconfidence", report.underconfidence},
            {"n_cases", report.n_cases},
            {"calibration_deciles", deciles},
            {"guaranteed_min_uncertainty", report.guaranteed_min_uncertainty},
            {"fraction_at_min", report.fraction_at_min}};
  return j.dump(2) + "\n";
}

EvaluationReport report_from_json_string(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed report JSON");
  try {
    EvaluationReport report;
    report.brier = j.at("brier").get<double>();
    report.variance = j.at("variance").get<double>();
    report.resolution = j.at("resolution").get<double>();
    report.unspecificity = j.at("unspecificity").get<double>();
    report.unreliability = j.at("unreliability").get<double>();
    report.overconfidence = j.at("overconfidence").get<double>();
    report.underconfidence = j.at("underconfidence").get<double>();
    report.n_cases = j.at("n_cases").get<std::int64_t>();
    const json& deciles = j.at("calibration_deciles");
    for (std::size_t i = 0; i < 10; ++i) {
      report.calibration_deciles[i] = {deciles.at(i).at("mean_certainty").get<double>(),
                                       deciles.at(i).at("accuracy").get<double>()};
    }
    report.guaranteed_min_uncertainty = j.at("guaranteed_min_uncertainty").get<double>();
    report.fraction_at_min = j.at("fraction_at_min").get<double>();
    return report;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad report JSON: ") + e.what());
  }
}

std::vector<ImportanceRow> feature_importance_study(const Dataset& train,
                                                    const Dataset& calibration,
                                                    const Dataset& test,
                                                    const qim::CalibratedTree& stateless_tree,
                                                    const qim::QimParams& params) {
  const wrapper::TaTable train_table = wrapper::build_ta_training_table(train, stateless_tree);
  const wrapper::TaTable cal_table = wrapper::build_ta_training_table(calibration, stateless_tree);
  const wrapper::TaTable test_table = wrapper::build_ta_training_table(test, stateless_tree);

  std::vector<ImportanceRow> rows;
  rows.reserve(16);
  for (int mask = 0; mask < 16; ++mask) {
    ImportanceRow row;
    row.ratio = (mask & 8) != 0;
    row.length = (mask & 4) != 0;
    row.size = (mask & 2) != 0;
    row.certainty = (mask & 1) != 0;

    std::vector<std::string> names = stateless_tree.feature_names;
    if (row.ratio) names.emplace_back(wrapper::kTaqfNames[0]);
    if (row.length) names.emplace_back(wrapper::kTaqfNames[1]);
    if (row.size) names.emplace_back(wrapper::kTaqfNames[2]);
    if (row.certainty) names.emplace_back(wrapper::kTaqfNames[3]);

    const wrapper::TaTable train_sel = wrapper::project_table(train_table, names);
    const wrapper::TaTable cal_sel = wrapper::project_table(cal_table, names);
    const wrapper::TaTable test_sel = wrapper::project_table(test_table, names);

    auto fitted = qim::fit_tree(train_sel.rows, params.max_depth);
    const qim::CalibratedTree tree = qim::calibrate_tree(
        std::move(fitted), cal_sel.rows, names, params.min_leaf, params.confidence);

    std::vector<ScoredCase> cases;
    cases.reserve(test_sel.rows.size());
    for (const auto& test_row : test_sel.rows) {
      cases.push_back({qim::predict_uncertainty(tree, test_row.features), test_row.failed});
    }
    row.brier = brier_score(cases);
    rows.push_back(row);
  }
  return rows;
}

std::string deciles_csv(const std::array<DecilePoint, 10>& deciles) {
  std::ostringstream out;
  out << "decile,mean_certainty,accuracy\n";
  for (std::size_t i = 0; i < deciles.size(); ++i) {
    out << (i + 1) << ',' << fmt6(deciles[i].mean_certainty) << ','
        << fmt6(deciles[i].accuracy) << '\n';
  }
  return out.str();
}

std::string misclass_csv(const MisclassCurve& curve) {
  std::ostringstream out;
  out << "step,isolated_rate,fused_rate\n";
  for (std::size_t t = 0; t < curve.isolated.size(); ++t) {
    out << (t + 1) << ',' << fmt6(curve.isolated[t]) << ',' << fmt6(curve.fused[t]) << '\n';
  }
  return out.str();
}

std::string importance_csv(std::span<const ImportanceRow> rows) {
  std::ostringstream out;
  out << "ratio,length,size,certainty,brier\n";
  for (const auto& row : rows) {
    out << (row.ratio ? 1 : 0) << ',' << (row.length ? 1 : 0) << ',' << (row.size ? 1 : 0)
        << ',' << (row.certainty ? 1 : 0) << ',' << fmt6(row.brier) << '\n';
  }
  return out.str();
}

}  // namespace tauw::eval
