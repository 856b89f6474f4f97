// Python bindings for the core operations: calibrated trees, fusion rules,
// timeseries quality factors, scoring, and the synthetic benchmark pipeline.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "tauw/eval.hpp"
#include "tauw/pipeline.hpp"
#include "tauw/qim.hpp"
#include "tauw/simgen.hpp"
#include "tauw/wrapper.hpp"

namespace py = pybind11;
using namespace tauw;

namespace {

std::vector<eval::ScoredCase> to_cases(
    const std::vector<std::pair<double, bool>>& pairs) {
  std::vector<eval::ScoredCase> cases;
  cases.reserve(pairs.size());
  for (const auto& [u, failed] : pairs) cases.push_back({u, failed});
  return cases;
}

std::vector<qim::TrainingRow> to_rows(const std::vector<std::vector<double>>& features,
                                      const std::vector<bool>& failed) {
  if (features.size() != failed.size()) {
    throw DomainError("features and failed must have the same length");
  }
  std::vector<qim::TrainingRow> rows;
  rows.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) rows.push_back({features[i], failed[i]});
  return rows;
}

py::dict report_to_dict(const eval::EvaluationReport& report) {
  py::dict out;
  out["brier"] = report.brier;
  out["variance"] = report.variance;
  out["resolution"] = report.resolution;
  out["unspecificity"] = report.unspecificity;
  out["unreliability"] = report.unreliability;
  out["overconfidence"] = report.overconfidence;
  out["underconfidence"] = report.underconfidence;
  out["n_cases"] = report.n_cases;
  out["guaranteed_min_uncertainty"] = report.guaranteed_min_uncertainty;
  out["fraction_at_min"] = report.fraction_at_min;
  py::list deciles;
  for (const auto& point : report.calibration_deciles) {
    deciles.append(py::make_tuple(point.mean_certainty, point.accuracy));
  }
  out["calibration_deciles"] = deciles;
  return out;
}

}  // namespace

PYBIND11_MODULE(_tauw, m) {
  m.doc() = "Timeseries-aware uncertainty wrappers for fused classifier outcomes";
  m.attr("__version__") = TAUW_VERSION;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  // qim
  m.def("gini_impurity", &qim::gini_impurity, py::arg("error_count"), py::arg("total"));
  m.def("clopper_pearson_upper", &qim::clopper_pearson_upper, py::arg("errors"),
        py::arg("draws"), py::arg("confidence"),
        "Exact one-sided upper confidence bound on a binomial failure rate.");
  m.def("binomial_cdf", &qim::binomial_cdf, py::arg("k"), py::arg("n"), py::arg("p"));

  py::class_<qim::CalibratedTree>(m, "CalibratedTree")
      .def_property_readonly("feature_names",
                             [](const qim::CalibratedTree& t) { return t.feature_names; })
      .def_property_readonly("confidence_level",
                             [](const qim::CalibratedTree& t) { return t.confidence_level; })
      .def_property_readonly("min_leaf_calibration",
                             [](const qim::CalibratedTree& t) { return t.min_leaf_calibration; })
      .def("predict_uncertainty",
           [](const qim::CalibratedTree& t, const std::vector<double>& features) {
             return qim::predict_uncertainty(t, features);
           },
           py::arg("features"))
      .def("leaf_bounds",
           [](const qim::CalibratedTree& t) {
             std::vector<std::pair<double, std::int64_t>> out;
             for (const auto* leaf : qim::collect_leaves(*t.root)) {
               out.emplace_back(*leaf->calibrated_uncertainty, *leaf->calibration_count);
             }
             return out;
           },
           "(bound, calibration_count) per leaf")
      .def("to_json", [](const qim::CalibratedTree& t) { return qim::tree_to_json_string(t); })
      .def_static("from_json",
                  [](const std::string& text) { return qim::tree_from_json_string(text); });

  m.def("fit_calibrated_tree",
        [](const std::vector<std::vector<double>>& train_features,
           const std::vector<bool>& train_failed,
           const std::vector<std::vector<double>>& cal_features,
           const std::vector<bool>& cal_failed, const std::vector<std::string>& feature_names,
           int max_depth, std::int64_t min_leaf, double confidence) {
          auto tree = qim::fit_tree(to_rows(train_features, train_failed), max_depth);
          return qim::calibrate_tree(std::move(tree), to_rows(cal_features, cal_failed),
                                     feature_names, min_leaf, confidence);
        },
        py::arg("train_features"), py::arg("train_failed"), py::arg("cal_features"),
        py::arg("cal_failed"), py::arg("feature_names"), py::arg("max_depth") = 8,
        py::arg("min_leaf") = 200, py::arg("confidence") = 0.999);

  // fusion
  m.def("majority_vote",
        [](const std::vector<int>& outcomes) {
          const auto fused = fusion::majority_vote(outcomes);
          py::dict out;
          out["label"] = fused.label;
          out["tie_broken"] = fused.tie_broken;
          out["vote_counts"] = fused.vote_counts;
          return out;
        },
        py::arg("outcomes"));
  m.def("naive_uf",
        [](const std::vector<double>& u) { return fusion::naive_uf(u); }, py::arg("uncertainties"));
  m.def("opportune_uf",
        [](const std::vector<double>& u) { return fusion::opportune_uf(u); },
        py::arg("uncertainties"));
  m.def("worstcase_uf",
        [](const std::vector<double>& u) { return fusion::worstcase_uf(u); },
        py::arg("uncertainties"));

  // wrapper / taqf
  m.def("taqf_ratio",
        [](const std::vector<int>& outcomes, int fused) {
          return wrapper::taqf_ratio(outcomes, fused);
        },
        py::arg("outcomes"), py::arg("fused_label"));
  m.def("taqf_size",
        [](const std::vector<int>& outcomes) { return wrapper::taqf_size(outcomes); },
        py::arg("outcomes"));
  m.def("taqf_cumulative_certainty",
        [](const std::vector<int>& outcomes, const std::vector<double>& uncertainties,
           int fused) {
          return wrapper::taqf_cumulative_certainty(outcomes, uncertainties, fused);
        },
        py::arg("outcomes"), py::arg("step_uncertainties"), py::arg("fused_label"));

  // eval
  m.def("brier_score",
        [](const std::vector<std::pair<double, bool>>& cases) {
          return eval::brier_score(to_cases(cases));
        },
        py::arg("cases"), "cases are (predicted_uncertainty, failed) pairs");
  m.def("decompose",
        [](const std::vector<std::pair<double, bool>>& cases) {
          const auto d = eval::decompose(to_cases(cases));
          return py::make_tuple(d.variance, d.resolution, d.unreliability);
        },
        py::arg("cases"), "returns (variance, resolution, unreliability)");
  m.def("confidence_split",
        [](const std::vector<std::pair<double, bool>>& cases) {
          const auto split = eval::confidence_split(to_cases(cases));
          return py::make_tuple(split.overconfidence, split.underconfidence);
        },
        py::arg("cases"));
  m.def("evaluate_cases",
        [](const std::vector<std::pair<double, bool>>& cases) {
          return report_to_dict(eval::evaluate_cases(to_cases(cases)));
        },
        py::arg("cases"));

  // benchmark pipeline
  m.def("paperlike_config_json",
        []() { return simgen::config_to_json_string(simgen::paperlike_config()); });
  m.def("run_benchmark",
        [](const std::string& config_json, std::uint64_t seed, const std::string& fusion,
           const std::string& uf) {
          const auto config = config_json.empty()
                                  ? simgen::paperlike_config()
                                  : simgen::config_from_json_string(config_json);
          const auto data = pipeline::simulate(config, seed);
          const std::vector<std::string> taqf = {"ratio", "length", "size", "certainty"};
          const auto models = pipeline::fit(data.train, data.calibration, qim::QimParams{}, taqf);
          const auto replays = wrapper::replay_dataset(data.test, models.stateless, &models.tauw);
          const auto cases = pipeline::condition_cases(
              replays, pipeline::fusion_mode_from_string(fusion),
              pipeline::uf_mode_from_string(uf));
          return report_to_dict(eval::evaluate_cases(cases));
        },
        py::arg("config_json") = "", py::arg("seed") = 42, py::arg("fusion") = "if",
        py::arg("uf") = "tauw",
        "simulate, fit, and score one evaluation condition; returns the report as a dict");
}
