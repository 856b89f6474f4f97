#include "tauw/core.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tauw {

using nlohmann::json;

std::string_view to_string(QfKind kind) {
  return kind == QfKind::ordinal ? "ordinal" : "continuous";
}

QfKind qf_kind_from_string(std::string_view s) {
  if (s == "ordinal") return QfKind::ordinal;
  if (s == "continuous") return QfKind::continuous;
  throw IoError("unknown qf kind: " + std::string(s));
}

int QfSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> QfSchema::names() const {
  std::vector<std::string> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(f.name);
  return out;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::calibration: return "calibration";
    case Split::test: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "calibration") return Split::calibration;
  if (s == "test") return Split::test;
  throw IoError("unknown split tag: " + std::string(s));
}

std::int64_t Dataset::step_count() const {
  std::int64_t n = 0;
  for (const auto& ts : series) n += static_cast<std::int64_t>(ts.steps.size());
  return n;
}

namespace {

bool valid_label_id(const Dataset& d, int id) {
  for (const auto& l : d.labels) {
    if (l.id == id) return true;
  }
  return false;
}

}  // namespace

std::vector<Violation> validate_dataset(const Dataset& dataset) {
  std::vector<Violation> report;
  auto add = [&report](std::string series_id, int step, std::string rule) {
    report.push_back({std::move(series_id), step, std::move(rule)});
  };

  std::set<int> label_ids;
  for (const auto& label : dataset.labels) {
    if (label.name.empty()) add("", -1, "empty label name");
    if (!label_ids.insert(label.id).second) add("", -1, "duplicate label id");
  }

  std::set<std::string> qf_names;
  for (const auto& field : dataset.qf_schema.fields) {
    if (field.name.empty()) add("", -1, "empty qf name");
    if (!qf_names.insert(field.name).second) add("", -1, "duplicate qf name");
  }

  std::set<std::string> series_ids;
  for (const auto& ts : dataset.series) {
    if (!series_ids.insert(ts.series_id).second) {
      add(ts.series_id, -1, "duplicate series_id");
    }
    if (ts.steps.empty()) {
      add(ts.series_id, -1, "empty series");
      continue;
    }
    const int truth = ts.steps.front().truth;
    for (std::size_t i = 0; i < ts.steps.size(); ++i) {
      const StepRecord& rec = ts.steps[i];
      const int step = rec.step_index;
      if (rec.series_id != ts.series_id) add(ts.series_id, step, "series_id mismatch");
      if (rec.step_index != static_cast<int>(i)) add(ts.series_id, step, "non-consecutive step_index");
      if (rec.truth != truth) add(ts.series_id, step, "truth changes mid-series");
      if (!valid_label_id(dataset, rec.truth)) add(ts.series_id, step, "truth label id out of range");
      if (!valid_label_id(dataset, rec.outcome)) add(ts.series_id, step, "outcome label id out of range");
      if (rec.qf.size() != dataset.qf_schema.fields.size()) {
        add(ts.series_id, step, "qf arity mismatch");
      } else {
        for (std::size_t j = 0; j < rec.qf.size(); ++j) {
          const double v = rec.qf[j];
          if (dataset.qf_schema.fields[j].kind == QfKind::ordinal) {
            if (!(v == 0.0 || v == 1.0 || v == 2.0 || v == 3.0)) {
              add(ts.series_id, step, "ordinal value out of {0,1,2,3}");
            }
          } else if (!std::isfinite(v)) {
            add(ts.series_id, step, "non-finite continuous value");
          }
        }
      }
      if (rec.step_uncertainty &&
          !(*rec.step_uncertainty >= 0.0 && *rec.step_uncertainty <= 1.0)) {
        add(ts.series_id, step, "uncertainty out of [0,1]");
      }
    }
  }
  return report;
}

namespace {

json header_to_json(const Dataset& d) {
  json labels = json::array();
  for (const auto& l : d.labels) labels.push_back(l.name);
  json schema = json::array();
  for (const auto& f : d.qf_schema.fields) {
    schema.push_back({{"name", f.name}, {"kind", std::string(to_string(f.kind))}});
  }
  return {{"labels", labels}, {"qf_schema", schema}, {"split", std::string(to_string(d.split))}};
}

json record_to_json(const Dataset& d, const StepRecord& rec) {
  json qf = json::object();
  for (std::size_t j = 0; j < rec.qf.size(); ++j) {
    const QfField& f = d.qf_schema.fields[j];
    if (f.kind == QfKind::ordinal) {
      qf[f.name] = static_cast<std::int64_t>(rec.qf[j]);
    } else {
      qf[f.name] = rec.qf[j];
    }
  }
  json out = {{"series_id", rec.series_id}, {"step", rec.step_index},
              {"truth", rec.truth},         {"outcome", rec.outcome},
              {"qf", qf}};
  if (rec.step_uncertainty) out["u"] = *rec.step_uncertainty;
  return out;
}

json parse_line(const std::string& line, int lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) {
    throw IoError("malformed JSON on line " + std::to_string(lineno));
  }
  return j;
}

}  // namespace

void write_dataset_jsonl(const Dataset& dataset, std::ostream& out) {
  out << header_to_json(dataset).dump() << '\n';
  for (const auto& ts : dataset.series) {
    for (const auto& rec : ts.steps) {
      out << record_to_json(dataset, rec).dump() << '\n';
    }
  }
  if (!out) throw IoError("write failed");
}

void write_dataset_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  write_dataset_jsonl(dataset, out);
}

Dataset read_dataset_jsonl(std::istream& in) {
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw IoError("empty dataset stream");
  ++lineno;

  Dataset dataset;
  try {
    json header = parse_line(line, lineno);
    int id = 0;
    for (const auto& name : header.at("labels")) {
      dataset.labels.push_back({id++, name.get<std::string>()});
    }
    for (const auto& f : header.at("qf_schema")) {
      dataset.qf_schema.fields.push_back(
          {f.at("name").get<std::string>(),
           qf_kind_from_string(f.at("kind").get<std::string>())});
    }
    dataset.split = split_from_string(header.at("split").get<std::string>());
  } catch (const json::exception& e) {
    throw IoError(std::string("bad dataset header: ") + e.what());
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, lineno);
    StepRecord rec;
    try {
      rec.series_id = j.at("series_id").get<std::string>();
      rec.step_index = j.at("step").get<int>();
      rec.truth = j.at("truth").get<int>();
      rec.outcome = j.at("outcome").get<int>();
      const json& qf = j.at("qf");
      rec.qf.resize(dataset.qf_schema.fields.size(), 0.0);
      if (qf.size() != dataset.qf_schema.fields.size()) {
        throw IoError("qf keys do not match header schema on line " + std::to_string(lineno));
      }
      for (std::size_t k = 0; k < dataset.qf_schema.fields.size(); ++k) {
        const std::string& name = dataset.qf_schema.fields[k].name;
        if (!qf.contains(name)) {
          throw IoError("missing qf '" + name + "' on line " + std::to_string(lineno));
        }
        rec.qf[k] = qf.at(name).get<double>();
      }
      if (j.contains("u")) rec.step_uncertainty = j.at("u").get<double>();
    } catch (const json::exception& e) {
      throw IoError("bad record on line " + std::to_string(lineno) + ": " + e.what());
    }
    // Consecutive runs of one series_id form one series; a reappearing id
    // becomes a second series with the same id, which validation flags.
    if (dataset.series.empty() || dataset.series.back().series_id != rec.series_id) {
      dataset.series.push_back({rec.series_id, {}});
    }
    dataset.series.back().steps.push_back(std::move(rec));
  }
  return dataset;
}

Dataset read_dataset_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return read_dataset_jsonl(in);
}

}  // namespace tauw
