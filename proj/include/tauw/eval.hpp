#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tauw/core.hpp"
#include "tauw/qim.hpp"

namespace tauw::eval {

/// One scored prediction: the forecast probability of failure and whether
/// the outcome actually failed.
struct ScoredCase {
  double predicted_uncertainty = 0.0;
  bool failed = false;
};

/// How forecasts are grouped for the decomposition. Calibrated trees emit
/// finitely many leaf values, so exact-value bins are the default; the
/// fixed-width fallback exists for genuinely continuous forecasters.
enum class Binning { exact_values, fixed_width_100 };

/// Mean squared difference between the forecast failure probability and the
/// 0/1 failure indicator.
double brier_score(std::span<const ScoredCase> cases);

struct Decomposition {
  double variance = 0.0;
  double resolution = 0.0;
  double unreliability = 0.0;
};

/// Murphy partition of the Brier score: bs = variance - resolution
/// + unreliability. Variance depends only on the overall failure rate.
Decomposition decompose(std::span<const ScoredCase> cases,
                        Binning binning = Binning::exact_values);

struct ConfidenceSplit {
  double overconfidence = 0.0;   // bins whose forecast underestimates the error rate
  double underconfidence = 0.0;  // bins whose forecast overestimates it
};

/// Splits the unreliability mass by the sign of the per-bin miscalibration.
ConfidenceSplit confidence_split(std::span<const ScoredCase> cases,
                                 Binning binning = Binning::exact_values);

struct DecilePoint {
  double mean_certainty = 0.0;
  double accuracy = 0.0;
};

/// Sorts cases by predicted certainty (1 - uncertainty), splits them into 10
/// equal-count groups (remainder to the earliest groups), and reports each
/// group's mean certainty and empirical accuracy. Needs at least 10 cases.
std::array<DecilePoint, 10> calibration_deciles(std::span<const ScoredCase> cases);

struct StepOutcome {
  bool isolated_failed = false;
  bool fused_failed = false;
};

struct MisclassCurve {
  std::vector<double> isolated;
  std::vector<double> fused;
};

/// Per-step misclassification rates across series of equal length.
MisclassCurve misclassification_by_step(
    const std::vector<std::vector<StepOutcome>>& per_series);

struct UncertaintySummary {
  double guaranteed_min_uncertainty = 0.0;
  double fraction_at_min = 0.0;
  std::array<std::int64_t, 100> histogram{};  // bin width 0.01 over [0,1]
};

UncertaintySummary uncertainty_distribution(std::span<const ScoredCase> cases);

struct EvaluationReport {
  double brier = 0.0;
  double variance = 0.0;
  double resolution = 0.0;
  double unspecificity = 0.0;
  double unreliability = 0.0;
  double overconfidence = 0.0;
  double underconfidence = 0.0;
  std::int64_t n_cases = 0;
  std::array<DecilePoint, 10> calibration_deciles{};
  double guaranteed_min_uncertainty = 0.0;
  double fraction_at_min = 0.0;
};

EvaluationReport evaluate_cases(std::span<const ScoredCase> cases);

std::string report_to_json_string(const EvaluationReport& report);
EvaluationReport report_from_json_string(const std::string& text);

struct ImportanceRow {
  bool ratio = false;
  bool length = false;
  bool size = false;
  bool certainty = false;
  double brier = 0.0;
};

/// Refits and recalibrates the timeseries-aware tree for each of the 16
/// subsets of {ratio, length, size, certainty} on top of the stateless QFs
/// and reports the resulting test Brier score per subset. The empty subset
/// is the stateless-feature-only model scored on fused outcomes.
std::vector<ImportanceRow> feature_importance_study(const Dataset& train,
                                                    const Dataset& calibration,
                                                    const Dataset& test,
                                                    const qim::CalibratedTree& stateless_tree,
                                                    const qim::QimParams& params);

// CSV renderings of the plot data; reals carry 6 significant digits.
std::string deciles_csv(const std::array<DecilePoint, 10>& deciles);
std::string misclass_csv(const MisclassCurve& curve);
std::string importance_csv(std::span<const ImportanceRow> rows);

}  // namespace tauw::eval
