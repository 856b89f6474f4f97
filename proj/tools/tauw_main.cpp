// Command-line pipeline: simulate -> fit -> evaluate / importance.
//
// Exit codes: 0 success, 2 usage or config problem, 3 calibration
// infeasible, 4 schema mismatch, 1 unexpected failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tauw/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& out_dir, json manifest) {
  manifest["artifact_version"] = TAUW_VERSION;
  manifest["created_utc"] = utc_now();
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw tauw::IoError("cannot write manifest in " + out_dir.string());
  out << manifest.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw tauw::IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw tauw::IoError("write failed: " + path.string());
}

tauw::Dataset load_valid_dataset(const fs::path& path) {
  tauw::Dataset dataset = tauw::read_dataset_jsonl(path);
  const auto violations = tauw::validate_dataset(dataset);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << path.string() << " fails validation (" << violations.size() << " violations):";
    const std::size_t shown = std::min<std::size_t>(violations.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) {
      msg << "\n  series=" << violations[i].series_id << " step=" << violations[i].step_index
          << ": " << violations[i].rule;
    }
    throw tauw::ConfigError(msg.str());
  }
  return dataset;
}

struct QimFlags {
  int max_depth = 8;
  std::int64_t min_leaf = 200;
  double confidence = 0.999;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--max-depth", max_depth, "CART depth limit")->capture_default_str();
    cmd->add_option("--min-leaf", min_leaf, "minimum calibration samples per leaf")
        ->capture_default_str();
    cmd->add_option("--confidence", confidence, "leaf bound confidence level, in (0.5, 1)")
        ->capture_default_str();
  }

  tauw::qim::QimParams params() const {
    if (!(confidence > 0.5 && confidence < 1.0)) {
      throw tauw::ConfigError("--confidence must lie in the open interval (0.5, 1)");
    }
    if (max_depth < 0) throw tauw::ConfigError("--max-depth must be >= 0");
    if (min_leaf < 1) throw tauw::ConfigError("--min-leaf must be >= 1");
    return {max_depth, min_leaf, confidence};
  }
};

void run_simulate(const std::string& config_arg, bool seed_given, std::uint64_t seed_flag,
                  const fs::path& out_dir) {
  tauw::simgen::ScenarioConfig config = tauw::simgen::load_config(config_arg);
  const std::uint64_t seed = seed_given ? seed_flag : config.seed;

  fs::create_directories(out_dir);
  const tauw::pipeline::SimulatedData data = tauw::pipeline::simulate(config, seed);
  tauw::write_dataset_jsonl(data.train, out_dir / "train.jsonl");
  tauw::write_dataset_jsonl(data.calibration, out_dir / "calibration.jsonl");
  tauw::write_dataset_jsonl(data.test, out_dir / "test.jsonl");

  write_manifest(out_dir,
                 {{"command", "simulate"},
                  {"config", config_arg},
                  {"resolved_config", json::parse(tauw::simgen::config_to_json_string(config))},
                  {"seed", seed},
                  {"outputs", {"train.jsonl", "calibration.jsonl", "test.jsonl"}}});
  std::cout << "wrote " << data.train.series.size() << "/" << data.calibration.series.size()
            << "/" << data.test.series.size() << " series to " << out_dir.string() << "\n";
}

void run_fit(const fs::path& train_path, const fs::path& cal_path, const fs::path& out_dir,
             const QimFlags& flags, const std::string& taqf_csv) {
  const tauw::qim::QimParams params = flags.params();
  const auto subset = tauw::pipeline::parse_taqf_subset(taqf_csv);

  const tauw::Dataset train = load_valid_dataset(train_path);
  const tauw::Dataset cal = load_valid_dataset(cal_path);

  fs::create_directories(out_dir);
  const tauw::pipeline::Models models = tauw::pipeline::fit(train, cal, params, subset);
  tauw::qim::save_tree(models.stateless, out_dir / "stateless.json");
  tauw::qim::save_tree(models.tauw, out_dir / "tauw.json");

  write_manifest(out_dir, {{"command", "fit"},
                           {"inputs", {{"train", train_path.string()}, {"cal", cal_path.string()}}},
                           {"options",
                            {{"max_depth", params.max_depth},
                             {"min_leaf", params.min_leaf},
                             {"confidence", params.confidence},
                             {"taqf", subset}}},
                           {"outputs", {"stateless.json", "tauw.json"}}});
  std::cout << "wrote stateless.json and tauw.json to " << out_dir.string() << "\n";
}

void run_evaluate(const fs::path& test_path, const fs::path& models_dir,
                  const std::string& stateless_override, const std::string& tauw_override,
                  const std::string& fusion_arg, const std::string& uf_arg,
                  const fs::path& out_dir) {
  const auto fusion = tauw::pipeline::fusion_mode_from_string(fusion_arg);
  const auto uf = tauw::pipeline::uf_mode_from_string(uf_arg);
  if (fusion == tauw::pipeline::FusionMode::none && uf != tauw::pipeline::UfMode::none) {
    throw tauw::ConfigError("--uf " + uf_arg + " requires --fusion if");
  }

  const fs::path stateless_path =
      stateless_override.empty() ? models_dir / "stateless.json" : fs::path(stateless_override);
  const fs::path tauw_path =
      tauw_override.empty() ? models_dir / "tauw.json" : fs::path(tauw_override);

  const tauw::Dataset test = load_valid_dataset(test_path);
  const tauw::qim::CalibratedTree stateless = tauw::qim::load_tree(stateless_path);
  const tauw::qim::CalibratedTree ta = tauw::qim::load_tree(tauw_path);

  const auto replays = tauw::wrapper::replay_dataset(test, stateless, &ta);
  const auto cases = tauw::pipeline::condition_cases(replays, fusion, uf);
  const tauw::eval::EvaluationReport report = tauw::eval::evaluate_cases(cases);
  const auto curve = tauw::eval::misclassification_by_step(tauw::pipeline::step_outcomes(replays));

  fs::create_directories(out_dir);
  write_text(out_dir / "report.json", tauw::eval::report_to_json_string(report));
  write_text(out_dir / "calibration_deciles.csv", tauw::eval::deciles_csv(report.calibration_deciles));
  write_text(out_dir / "misclass_by_step.csv", tauw::eval::misclass_csv(curve));

  write_manifest(out_dir,
                 {{"command", "evaluate"},
                  {"inputs",
                   {{"test", test_path.string()},
                    {"stateless", stateless_path.string()},
                    {"tauw", tauw_path.string()}}},
                  {"options", {{"fusion", fusion_arg}, {"uf", uf_arg}}},
                  {"outputs", {"report.json", "calibration_deciles.csv", "misclass_by_step.csv"}}});
  std::cout << "brier=" << report.brier << " overconfidence=" << report.overconfidence
            << " (report in " << out_dir.string() << ")\n";
}

void run_importance(const fs::path& train_path, const fs::path& cal_path,
                    const fs::path& test_path, const fs::path& out_dir, const QimFlags& flags) {
  const tauw::qim::QimParams params = flags.params();
  const tauw::Dataset train = load_valid_dataset(train_path);
  const tauw::Dataset cal = load_valid_dataset(cal_path);
  const tauw::Dataset test = load_valid_dataset(test_path);

  const tauw::pipeline::Models models = tauw::pipeline::fit(train, cal, params, {});
  const auto rows = tauw::eval::feature_importance_study(train, cal, test, models.stateless, params);

  fs::create_directories(out_dir);
  write_text(out_dir / "importance.csv", tauw::eval::importance_csv(rows));
  write_manifest(out_dir,
                 {{"command", "importance"},
                  {"inputs",
                   {{"train", train_path.string()},
                    {"cal", cal_path.string()},
                    {"test", test_path.string()}}},
                  {"options",
                   {{"max_depth", params.max_depth},
                    {"min_leaf", params.min_leaf},
                    {"confidence", params.confidence}}},
                  {"outputs", {"importance.csv"}}});
  std::cout << "wrote importance.csv (" << rows.size() << " rows) to " << out_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"timeseries-aware uncertainty wrappers for fused classifier outcomes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(TAUW_VERSION));

  // simulate
  std::string sim_config;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic benchmark dataset");
  simulate->add_option("--config", sim_config, "config JSON path, or 'paperlike'")->required();
  simulate->add_option("--seed", sim_seed, "seed override (default: from config)");
  simulate->add_option("--out", sim_out, "output directory")->required();

  // fit
  std::string fit_train, fit_cal, fit_out, fit_taqf = "ratio,length,size,certainty";
  QimFlags fit_flags;
  CLI::App* fit = app.add_subcommand("fit", "fit and calibrate the uncertainty models");
  fit->add_option("--train", fit_train, "training dataset (JSONL)")->required();
  fit->add_option("--cal", fit_cal, "calibration dataset (JSONL)")->required();
  fit->add_option("--out", fit_out, "output directory")->required();
  fit_flags.add_to(fit);
  fit->add_option("--taqf", fit_taqf, "comma list of timeseries features for the ta model")
      ->capture_default_str();

  // evaluate
  std::string eval_test, eval_models, eval_stateless, eval_tauw, eval_out;
  std::string eval_fusion = "if", eval_uf = "tauw";
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a model condition on a test dataset");
  evaluate->add_option("--test", eval_test, "test dataset (JSONL)")->required();
  evaluate->add_option("--models", eval_models, "directory holding stateless.json and tauw.json");
  evaluate->add_option("--stateless", eval_stateless, "explicit stateless model path");
  evaluate->add_option("--tauw", eval_tauw, "explicit ta model path");
  evaluate->add_option("--fusion", eval_fusion, "none|if")->capture_default_str();
  evaluate->add_option("--uf", eval_uf, "none|naive|opportune|worstcase|tauw")
      ->capture_default_str();
  evaluate->add_option("--out", eval_out, "output directory")->required();

  // importance
  std::string imp_train, imp_cal, imp_test, imp_out;
  QimFlags imp_flags;
  CLI::App* importance =
      app.add_subcommand("importance", "Brier score for every taQF feature subset");
  importance->add_option("--train", imp_train, "training dataset (JSONL)")->required();
  importance->add_option("--cal", imp_cal, "calibration dataset (JSONL)")->required();
  importance->add_option("--test", imp_test, "test dataset (JSONL)")->required();
  importance->add_option("--out", imp_out, "output directory")->required();
  imp_flags.add_to(importance);

  try {
    app.parse(argc, argv);
    if (simulate->parsed()) {
      run_simulate(sim_config, simulate->count("--seed") > 0, sim_seed, sim_out);
    }
    if (fit->parsed()) run_fit(fit_train, fit_cal, fit_out, fit_flags, fit_taqf);
    if (evaluate->parsed()) {
      if (eval_models.empty() && (eval_stateless.empty() || eval_tauw.empty())) {
        throw tauw::ConfigError("need --models DIR or both --stateless and --tauw");
      }
      run_evaluate(eval_test, eval_models, eval_stateless, eval_tauw, eval_fusion, eval_uf,
                   eval_out);
    }
    if (importance->parsed()) run_importance(imp_train, imp_cal, imp_test, imp_out, imp_flags);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 2;
  } catch (const tauw::SchemaError& e) {
    std::cerr << "schema mismatch: " << e.what() << "\n";
    return 4;
  } catch (const tauw::CalibrationError& e) {
    std::cerr << "calibration infeasible: " << e.what() << "\n";
    return 3;
  } catch (const tauw::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tauw::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tauw::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
