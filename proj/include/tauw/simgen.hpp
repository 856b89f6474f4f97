#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tauw/core.hpp"

namespace tauw::simgen {

/// One quality deficit: ordinal intensity 0..3 with a per-intensity
/// error-rate multiplier and sampling weight. Varying deficits may switch
/// intensity within a series; all others are drawn once per series.
struct DeficitSpec {
  std::string name;
  std::array<double, 4> multipliers{1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> weights{1.0, 0.0, 0.0, 0.0};
  bool varying = false;
};

/// Benchmark scenario: series of classifier outcomes on one object as it is
/// approached, with a decaying base error rate, multiplicative deficit
/// effects, and a persistent per-series confusion class that makes repeated
/// errors land on the same wrong label with probability error_correlation.
///
/// indicator_correlation adds serial dependence to the error indicators
/// themselves (a Markov chain that preserves the per-step marginals), i.e.
/// error clustering the quality factors cannot explain.
struct ScenarioConfig {
  int n_series = 1300;
  int series_length = 30;
  int n_classes = 10;
  std::vector<DeficitSpec> deficits;
  std::vector<double> base_curve;  // one value per step, non-increasing, in (0, 0.5)
  double error_correlation = 0.7;  // probability an error repeats the confusion class
  double indicator_correlation = 0.0;  // lag-1 correlation of the error indicators
  double varying_change_prob = 0.25;
  int subsample_length = 10;  // window applied to calibration/test series; 0 disables
  std::array<double, 3> split_fractions{0.4, 0.3, 0.3};
  std::uint64_t seed = 42;
};

/// Throws ConfigError on any invalid field.
void validate_config(const ScenarioConfig& config);

/// The built-in default benchmark: 1300 series x 30 steps, 10 classes,
/// 9 ordinal deficits, base error rate decaying 0.15 -> 0.02.
ScenarioConfig paperlike_config();

ScenarioConfig config_from_json_string(const std::string& text);
std::string config_to_json_string(const ScenarioConfig& config);

/// Resolves "paperlike" to the built-in config, anything else as a JSON file.
ScenarioConfig load_config(const std::string& path_or_name);

struct GeneratedDataset {
  Dataset dataset;
  // True per-step error probabilities, one vector per series. Kept for
  // oracle checks only; never written to dataset files.
  std::vector<std::vector<double>> latent_error_prob;
};

/// Deterministic generation: per-series RNG substreams derived from the seed
/// make the output independent of evaluation order.
GeneratedDataset generate(const ScenarioConfig& config, std::uint64_t seed);

/// Series-level random partition. Train and calibration sizes round down;
/// the remainder goes to test.
std::array<Dataset, 3> split_dataset(const Dataset& dataset,
                                     const std::array<double, 3>& fractions,
                                     std::uint64_t seed);

/// Contiguous window of target_length steps starting at a uniformly random
/// offset; step indices are rebased to 0.
Timeseries subsample_series(const Timeseries& series, int target_length, std::uint64_t seed);

}  // namespace tauw::simgen
