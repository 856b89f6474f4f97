#include "tauw/wrapper.hpp"

#include <algorithm>
#include <set>

namespace tauw::wrapper {

double taqf_ratio(std::span<const int> outcomes, int fused_label) {
  if (outcomes.empty()) throw DomainError("taqf_ratio: outcomes must be non-empty");
  const auto conforming = std::count(outcomes.begin(), outcomes.end(), fused_label);
  return static_cast<double>(conforming) / static_cast<double>(outcomes.size());
}

int taqf_length(const TimeseriesBuffer& buffer) {
  if (buffer.empty()) throw DomainError("taqf_length: buffer must be non-empty");
  return static_cast<int>(buffer.outcomes.size());
}

int taqf_size(std::span<const int> outcomes) {
  if (outcomes.empty()) throw DomainError("taqf_size: outcomes must be non-empty");
  return static_cast<int>(std::set<int>(outcomes.begin(), outcomes.end()).size());
}

double taqf_cumulative_certainty(std::span<const int> outcomes,
                                 std::span<const double> step_uncertainties,
                                 int fused_label) {
  if (outcomes.empty()) throw DomainError("taqf_cumulative_certainty: outcomes must be non-empty");
  if (outcomes.size() != step_uncertainties.size()) {
    throw DomainError("taqf_cumulative_certainty: outcomes and uncertainties differ in length");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < outcomes.size(); ++j) {
    if (outcomes[j] == fused_label) sum += 1.0 - step_uncertainties[j];
  }
  return sum;
}

TaqfVector compute_taqf(const TimeseriesBuffer& buffer, int fused_label) {
  TaqfVector v;
  v.ratio = taqf_ratio(buffer.outcomes, fused_label);
  v.length = taqf_length(buffer);
  v.size = taqf_size(buffer.outcomes);
  v.cumulative_certainty =
      taqf_cumulative_certainty(buffer.outcomes, buffer.step_uncertainties, fused_label);
  return v;
}

namespace {

int taqf_component(std::string_view name) {
  for (std::size_t i = 0; i < kTaqfNames.size(); ++i) {
    if (kTaqfNames[i] == name) return static_cast<int>(i);
  }
  return -1;
}

double taqf_value(const TaqfVector& v, int component) {
  switch (component) {
    case 0: return v.ratio;
    case 1: return static_cast<double>(v.length);
    case 2: return static_cast<double>(v.size);
    default: return v.cumulative_certainty;
  }
}

}  // namespace

WrapperContext make_wrapper_context(const QfSchema& schema,
                                    const qim::CalibratedTree& stateless,
                                    const qim::CalibratedTree* ta) {
  WrapperContext ctx;
  ctx.stateless = &stateless;
  ctx.ta = ta;
  for (const std::string& name : stateless.feature_names) {
    const int idx = schema.index_of(name);
    if (idx < 0) throw SchemaError("dataset lacks quality factor '" + name + "'");
    ctx.stateless_qf_index.push_back(idx);
  }
  if (ta) {
    for (const std::string& name : ta->feature_names) {
      const int component = taqf_component(name);
      if (component >= 0) {
        ctx.ta_source.push_back({true, component});
        continue;
      }
      const int idx = schema.index_of(name);
      if (idx < 0) throw SchemaError("dataset lacks quality factor '" + name + "'");
      ctx.ta_source.push_back({false, idx});
    }
  }
  return ctx;
}

WrapperStepResult process_step(TimeseriesBuffer& buffer, const StepRecord& record,
                               const WrapperContext& ctx) {
  if (buffer.series_id != record.series_id) buffer.reset(record.series_id);

  std::vector<double> stateless_features(ctx.stateless_qf_index.size());
  for (std::size_t i = 0; i < ctx.stateless_qf_index.size(); ++i) {
    const int idx = ctx.stateless_qf_index[i];
    if (static_cast<std::size_t>(idx) >= record.qf.size()) {
      throw SchemaError("record qf vector shorter than the dataset schema");
    }
    stateless_features[i] = record.qf[idx];
  }

  WrapperStepResult result;
  result.step_uncertainty = qim::predict_uncertainty(*ctx.stateless, stateless_features);

  buffer.outcomes.push_back(record.outcome);
  buffer.step_uncertainties.push_back(result.step_uncertainty);

  result.fused = fusion::majority_vote(buffer.outcomes);
  buffer.last_fused = result.fused;
  result.taqf = compute_taqf(buffer, result.fused.label);

  if (ctx.ta) {
    std::vector<double> ta_features(ctx.ta_source.size());
    for (std::size_t i = 0; i < ctx.ta_source.size(); ++i) {
      const auto& src = ctx.ta_source[i];
      ta_features[i] = src.is_taqf ? taqf_value(result.taqf, src.index) : record.qf[src.index];
    }
    result.ta_uncertainty = qim::predict_uncertainty(*ctx.ta, ta_features);
  } else {
    result.ta_uncertainty = result.step_uncertainty;
  }
  return result;
}

WrapperStepResult process_step(TimeseriesBuffer& buffer, const StepRecord& record,
                               const qim::CalibratedTree& stateless_tree,
                               const qim::CalibratedTree& ta_tree) {
  QfSchema schema;
  for (const std::string& name : stateless_tree.feature_names) {
    schema.fields.push_back({name, QfKind::continuous});
  }
  const WrapperContext ctx = make_wrapper_context(schema, stateless_tree, &ta_tree);
  return process_step(buffer, record, ctx);
}

TaTable build_ta_training_table(const Dataset& dataset,
                                const qim::CalibratedTree& stateless_tree) {
  const WrapperContext ctx = make_wrapper_context(dataset.qf_schema, stateless_tree, nullptr);

  TaTable table;
  table.feature_names = stateless_tree.feature_names;
  for (std::string_view name : kTaqfNames) table.feature_names.emplace_back(name);
  table.rows.reserve(static_cast<std::size_t>(dataset.step_count()));

  for (const Timeseries& series : dataset.series) {
    TimeseriesBuffer buffer;
    for (const StepRecord& record : series.steps) {
      const WrapperStepResult step = process_step(buffer, record, ctx);
      qim::TrainingRow row;
      row.features.reserve(table.feature_names.size());
      for (int idx : ctx.stateless_qf_index) row.features.push_back(record.qf[idx]);
      row.features.push_back(step.taqf.ratio);
      row.features.push_back(static_cast<double>(step.taqf.length));
      row.features.push_back(static_cast<double>(step.taqf.size));
      row.features.push_back(step.taqf.cumulative_certainty);
      row.failed = step.fused.label != record.truth;
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

TaTable project_table(const TaTable& table, std::span<const std::string> names) {
  std::vector<int> indices;
  indices.reserve(names.size());
  for (const std::string& name : names) {
    const auto it = std::find(table.feature_names.begin(), table.feature_names.end(), name);
    if (it == table.feature_names.end()) {
      throw SchemaError("table lacks feature '" + name + "'");
    }
    indices.push_back(static_cast<int>(it - table.feature_names.begin()));
  }
  TaTable out;
  out.feature_names.assign(names.begin(), names.end());
  out.rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    qim::TrainingRow r;
    r.failed = row.failed;
    r.features.reserve(indices.size());
    for (int idx : indices) r.features.push_back(row.features[idx]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

std::vector<SeriesReplay> replay_dataset(const Dataset& dataset,
                                         const qim::CalibratedTree& stateless_tree,
                                         const qim::CalibratedTree* ta_tree) {
  const WrapperContext ctx = make_wrapper_context(dataset.qf_schema, stateless_tree, ta_tree);

  std::vector<SeriesReplay> replays;
  replays.reserve(dataset.series.size());
  for (const Timeseries& series : dataset.series) {
    SeriesReplay replay;
    replay.series_id = series.series_id;
    replay.steps.reserve(series.steps.size());
    TimeseriesBuffer buffer;
    for (const StepRecord& record : series.steps) {
      const WrapperStepResult step = process_step(buffer, record, ctx);
      StepReplay r;
      r.step_index = record.step_index;
      r.truth = record.truth;
      r.outcome = record.outcome;
      r.fused_label = step.fused.label;
      r.tie_broken = step.fused.tie_broken;
      r.isolated_failed = record.outcome != record.truth;
      r.fused_failed = step.fused.label != record.truth;
      r.u_step = step.step_uncertainty;
      r.u_naive = fusion::naive_uf(buffer.step_uncertainties);
      r.u_opportune = fusion::opportune_uf(buffer.step_uncertainties);
      r.u_worstcase = fusion::worstcase_uf(buffer.step_uncertainties);
      r.u_ta = step.ta_uncertainty;
      r.taqf = step.taqf;
      replay.steps.push_back(r);
    }
    replays.push_back(std::move(replay));
  }
  return replays;
}

}  // namespace tauw::wrapper
