#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tauw/core.hpp"
#include "tauw/fusion.hpp"
#include "tauw/qim.hpp"

namespace tauw::wrapper {

/// Per-series runtime state: past outcomes and per-step uncertainties.
/// Cleared whenever a step arrives with a different series_id.
struct TimeseriesBuffer {
  std::string series_id;
  std::vector<int> outcomes;
  std::vector<double> step_uncertainties;
  std::optional<fusion::FusedOutcome> last_fused;

  bool empty() const { return outcomes.empty(); }

  void reset(std::string new_series_id) {
    series_id = std::move(new_series_id);
    outcomes.clear();
    step_uncertainties.clear();
    last_fused.reset();
  }
};

/// The four timeseries-derived quality factors.
struct TaqfVector {
  double ratio = 1.0;               // share of outcomes agreeing with the fused outcome
  int length = 1;                   // steps observed so far in this series
  int size = 1;                     // number of distinct outcomes
  double cumulative_certainty = 0;  // sum of (1 - u_j) over agreeing steps
};

/// Canonical feature names, in canonical order.
inline constexpr std::array<std::string_view, 4> kTaqfNames = {"ratio", "length", "size",
                                                               "certainty"};

double taqf_ratio(std::span<const int> outcomes, int fused_label);
int taqf_length(const TimeseriesBuffer& buffer);
int taqf_size(std::span<const int> outcomes);
double taqf_cumulative_certainty(std::span<const int> outcomes,
                                 std::span<const double> step_uncertainties, int fused_label);
TaqfVector compute_taqf(const TimeseriesBuffer& buffer, int fused_label);

struct WrapperStepResult {
  fusion::FusedOutcome fused;
  double step_uncertainty = 1.0;  // stateless estimate for the current step
  double ta_uncertainty = 1.0;    // timeseries-aware estimate for the fused outcome
  TaqfVector taqf;
};

/// Binds the two calibrated trees to a dataset QF schema, resolving every
/// tree feature by name once. The timeseries-aware tree may use any subset
/// of the taQF names on top of the dataset factors.
struct WrapperContext {
  const qim::CalibratedTree* stateless = nullptr;
  const qim::CalibratedTree* ta = nullptr;  // optional

  std::vector<int> stateless_qf_index;  // per stateless feature: dataset qf index

  struct TaSource {
    bool is_taqf = false;
    int index = 0;  // taqf component 0..3, or dataset qf index
  };
  std::vector<TaSource> ta_source;
};

WrapperContext make_wrapper_context(const QfSchema& schema,
                                    const qim::CalibratedTree& stateless,
                                    const qim::CalibratedTree* ta);

/// Advances the buffer by one step: clears it on a series change, attaches
/// the stateless per-step uncertainty, fuses the outcomes seen so far, and
/// estimates the fused outcome's uncertainty from stateless QFs plus taQFs.
WrapperStepResult process_step(TimeseriesBuffer& buffer, const StepRecord& record,
                               const WrapperContext& ctx);

/// Convenience overload; assumes record.qf is ordered like the stateless
/// tree's schema.
WrapperStepResult process_step(TimeseriesBuffer& buffer, const StepRecord& record,
                               const qim::CalibratedTree& stateless_tree,
                               const qim::CalibratedTree& ta_tree);

/// Feature table with named columns, used to fit and calibrate the
/// timeseries-aware tree and to score it on held-out data.
struct TaTable {
  std::vector<std::string> feature_names;
  std::vector<qim::TrainingRow> rows;
};

/// Replays every series through a fresh buffer and emits one row per step:
/// the stateless QFs plus all four taQFs, labeled with whether the fused
/// outcome disagreed with the ground truth.
TaTable build_ta_training_table(const Dataset& dataset,
                                const qim::CalibratedTree& stateless_tree);

/// Selects the named columns of a table, in the given order.
TaTable project_table(const TaTable& table, std::span<const std::string> names);

/// Everything the evaluation harness needs about one replayed step.
struct StepReplay {
  int step_index = 0;
  int truth = 0;
  int outcome = 0;
  int fused_label = 0;
  bool tie_broken = false;
  bool isolated_failed = false;
  bool fused_failed = false;
  double u_step = 1.0;
  double u_naive = 1.0;
  double u_opportune = 1.0;
  double u_worstcase = 1.0;
  double u_ta = 1.0;  // meaningful only when a ta tree was supplied
  TaqfVector taqf;
};

struct SeriesReplay {
  std::string series_id;
  std::vector<StepReplay> steps;
};

std::vector<SeriesReplay> replay_dataset(const Dataset& dataset,
                                         const qim::CalibratedTree& stateless_tree,
                                         const qim::CalibratedTree* ta_tree);

}  // namespace tauw::wrapper
