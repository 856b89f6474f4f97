#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tauw/errors.hpp"

namespace tauw {

enum class QfKind { ordinal, continuous };

std::string_view to_string(QfKind kind);
QfKind qf_kind_from_string(std::string_view s);

/// One quality factor column: ordinal factors carry intensity codes 0..3
/// (0 = absent), continuous factors carry finite reals.
struct QfField {
  std::string name;
  QfKind kind = QfKind::ordinal;

  bool operator==(const QfField&) const = default;
};

struct QfSchema {
  std::vector<QfField> fields;

  /// Index of the field with the given name, or -1.
  int index_of(std::string_view name) const;
  std::vector<std::string> names() const;

  bool operator==(const QfSchema&) const = default;
};

struct ClassLabel {
  int id = 0;
  std::string name;

  bool operator==(const ClassLabel&) const = default;
};

/// One timestep of one series. `truth` and `outcome` are label ids into the
/// dataset label table; `qf` holds the values in schema order.
/// `step_uncertainty` starts empty and is filled by the wrapper pipeline.
struct StepRecord {
  std::string series_id;
  int step_index = 0;
  int truth = 0;
  int outcome = 0;
  std::vector<double> qf;
  std::optional<double> step_uncertainty;

  bool operator==(const StepRecord&) const = default;
};

/// Consecutive observations of one physical object; the ground truth is
/// constant across the series.
struct Timeseries {
  std::string series_id;
  std::vector<StepRecord> steps;

  bool operator==(const Timeseries&) const = default;
};

enum class Split { train, calibration, test };

std::string_view to_string(Split split);
Split split_from_string(std::string_view s);

struct Dataset {
  std::vector<ClassLabel> labels;
  QfSchema qf_schema;
  Split split = Split::train;
  std::vector<Timeseries> series;

  std::int64_t step_count() const;

  bool operator==(const Dataset&) const = default;
};

/// One broken invariant. `step_index` is -1 for series- or dataset-level rules.
struct Violation {
  std::string series_id;
  int step_index = -1;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

/// Checks every dataset invariant and returns all violations found. Pure:
/// a well-formed dataset yields an empty report. I/O problems are never
/// reported here; the readers throw IoError for those.
std::vector<Violation> validate_dataset(const Dataset& dataset);

// JSON Lines dataset format. Line 1 is a header object
//   {"labels": [...], "qf_schema": [{"name":..., "kind":...}], "split":...}
// and each following line is one record with keys
//   series_id, step, truth, outcome, qf (object), u (optional).
Dataset read_dataset_jsonl(std::istream& in);
Dataset read_dataset_jsonl(const std::filesystem::path& path);
void write_dataset_jsonl(const Dataset& dataset, std::ostream& out);
void write_dataset_jsonl(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace tauw
