#include "tauw/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tauw/rng.hpp"
#include "tauw/wrapper.hpp"

namespace tauw::simgen {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSeriesStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr double kMinErrorProb = 1e-4;
constexpr double kMaxErrorProb = 0.9;

std::vector<double> decay_curve(double start, double end, int length) {
  std::vector<double> curve(length);
  if (length == 1) {
    curve[0] = start;
    return curve;
  }
  const double ratio = end / start;
  for (int t = 0; t < length; ++t) {
    curve[t] = start * std::pow(ratio, static_cast<double>(t) / (length - 1));
  }
  return curve;
}

}  // namespace

void validate_config(const ScenarioConfig& config) {
  auto fail = [](const std::string& msg) { throw ConfigError("scenario config: " + msg); };
  if (config.n_series < 1) fail("n_series must be >= 1");
  if (config.series_length < 1) fail("series_length must be >= 1");
  if (config.n_classes < 2) fail("n_classes must be >= 2");
  if (static_cast<int>(config.base_curve.size()) != config.series_length) {
    fail("base_curve must have one value per step");
  }
  for (std::size_t t = 0; t < config.base_curve.size(); ++t) {
    const double v = config.base_curve[t];
    if (!(v > 0.0 && v < 0.5)) fail("base_curve values must lie in (0, 0.5)");
    if (t > 0 && v > config.base_curve[t - 1] + 1e-12) fail("base_curve must be non-increasing");
  }
  if (!(config.error_correlation >= 0.0 && config.error_correlation <= 1.0)) {
    fail("error_correlation must lie in [0, 1]");
  }
  if (!(config.indicator_correlation >= 0.0 && config.indicator_correlation <= 1.0)) {
    fail("indicator_correlation must lie in [0, 1]");
  }
  if (!(config.varying_change_prob >= 0.0 && config.varying_change_prob <= 1.0)) {
    fail("varying_change_prob must lie in [0, 1]");
  }
  if (config.subsample_length != 0 &&
      (config.subsample_length < 1 || config.subsample_length > config.series_length)) {
    fail("subsample_length must be 0 or in [1, series_length]");
  }
  double fraction_sum = 0.0;
  for (double f : config.split_fractions) {
    if (!(f > 0.0)) fail("split fractions must be positive");
    fraction_sum += f;
  }
  if (std::abs(fraction_sum - 1.0) > 1e-9) fail("split fractions must sum to 1");

  std::set<std::string> names;
  for (const auto& deficit : config.deficits) {
    if (deficit.name.empty()) fail("deficit names must be non-empty");
    if (!names.insert(deficit.name).second) fail("duplicate deficit name: " + deficit.name);
    for (std::string_view reserved : wrapper::kTaqfNames) {
      if (deficit.name == reserved) {
        fail("deficit name '" + deficit.name + "' collides with a taQF feature name");
      }
    }
    double weight_sum = 0.0;
    for (double w : deficit.weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) fail("deficit weights must be non-negative");
      weight_sum += w;
    }
    if (!(weight_sum > 0.0)) fail("deficit weights must sum to a positive value");
    for (double m : deficit.multipliers) {
      if (!(m > 0.0) || !std::isfinite(m)) fail("deficit multipliers must be positive");
    }
  }
}

// Calibrated so that majority fusion clearly beats isolated predictions, the
// uncertainty-fusion baselines order the way the evaluation expects (naive
// overconfident, worst-case conservative), and the 0.999 leaf bounds stay
// sound on regenerated data. Rain is the dominant structural deficit; motion
// blur and artificial backlight vary within a series, with a rare
// near-catastrophic blur level that sinks the fused vote mid-series.
ScenarioConfig paperlike_config() {
  ScenarioConfig config;
  config.n_series = 4350;
  config.series_length = 30;
  config.n_classes = 10;
  config.base_curve = decay_curve(0.035, 0.008, 30);
  config.error_correlation = 0.7;
  config.indicator_correlation = 0.0;
  config.varying_change_prob = 0.35;
  config.subsample_length = 10;
  config.split_fractions = {0.4, 0.3, 0.3};
  config.seed = 42;
  config.deficits = {
      {"rain", {1.0, 2.5, 5.0, 9.0}, {0.87, 0.055, 0.045, 0.03}, false},
      {"darkness", {1.0, 1.3, 1.6, 2.0}, {0.875, 0.06, 0.04, 0.025}, false},
      {"haze", {1.0, 1.3, 1.6, 2.0}, {0.875, 0.06, 0.04, 0.025}, false},
      {"natural_backlight", {1.0, 1.05, 1.1, 1.15}, {0.88, 0.06, 0.04, 0.02}, false},
      {"artificial_backlight", {1.0, 1.5, 2.2, 3.2}, {0.85, 0.07, 0.05, 0.03}, true},
      {"sign_dirt", {1.0, 1.05, 1.1, 1.2}, {0.88, 0.07, 0.03, 0.02}, false},
      {"lens_dirt", {1.0, 1.05, 1.1, 1.15}, {0.90, 0.05, 0.03, 0.02}, false},
      {"steamed_lens", {1.0, 1.3, 1.7, 2.1}, {0.89, 0.055, 0.035, 0.02}, false},
      {"motion_blur", {1.0, 2.0, 4.0, 18.0}, {0.64, 0.16, 0.11, 0.09}, true},
  };
  return config;
}

ScenarioConfig config_from_json_string(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("malformed config JSON");
  ScenarioConfig config;
  try {
    config.n_series = j.value("n_series", config.n_series);
    config.series_length = j.value("series_length", config.series_length);
    config.n_classes = j.value("n_classes", config.n_classes);
    config.error_correlation = j.value("error_correlation", config.error_correlation);
    config.indicator_correlation = j.value("indicator_correlation", config.indicator_correlation);
    config.varying_change_prob = j.value("varying_change_prob", config.varying_change_prob);
    config.subsample_length = j.value("subsample_length", config.subsample_length);
    config.seed = j.value("seed", config.seed);
    if (j.contains("split_fractions")) {
      const auto f = j.at("split_fractions").get<std::vector<double>>();
      if (f.size() != 3) throw ConfigError("split_fractions must have 3 entries");
      std::copy(f.begin(), f.end(), config.split_fractions.begin());
    }
    if (j.contains("base_curve")) {
      const json& curve = j.at("base_curve");
      if (curve.is_array()) {
        config.base_curve = curve.get<std::vector<double>>();
      } else {
        config.base_curve = decay_curve(curve.at("start").get<double>(),
                                        curve.at("end").get<double>(),
                                        config.series_length);
      }
    } else {
      config.base_curve = decay_curve(0.15, 0.02, config.series_length);
    }
    if (j.contains("deficits")) {
      config.deficits.clear();
      for (const json& dj : j.at("deficits")) {
        DeficitSpec deficit;
        deficit.name = dj.at("name").get<std::string>();
        const auto m = dj.at("multipliers").get<std::vector<double>>();
        const auto w = dj.at("weights").get<std::vector<double>>();
        if (m.size() != 4 || w.size() != 4) {
          throw ConfigError("deficit multipliers and weights need 4 entries (intensity 0..3)");
        }
        std::copy(m.begin(), m.end(), deficit.multipliers.begin());
        std::copy(w.begin(), w.end(), deficit.weights.begin());
        deficit.varying = dj.value("varying", false);
        config.deficits.push_back(std::move(deficit));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config JSON: ") + e.what());
  }
  validate_config(config);
  return config;
}

std::string config_to_json_string(const ScenarioConfig& config) {
  json deficits = json::array();
  for (const auto& d : config.deficits) {
    deficits.push_back({{"name", d.name},
                        {"multipliers", d.multipliers},
                        {"weights", d.weights},
                        {"varying", d.varying}});
  }
  json j = {{"n_series", config.n_series},
            {"series_length", config.series_length},
            {"n_classes", config.n_classes},
            {"deficits", deficits},
            {"base_curve", config.base_curve},
            {"error_correlation", config.error_correlation},
            {"indicator_correlation", config.indicator_correlation},
            {"varying_change_prob", config.varying_change_prob},
            {"subsample_length", config.subsample_length},
            {"split_fractions", config.split_fractions},
            {"seed", config.seed}};
  return j.dump(2) + "\n";
}

ScenarioConfig load_config(const std::string& path_or_name) {
  if (path_or_name == "paperlike") return paperlike_config();
  std::ifstream in(path_or_name);
  if (!in) throw ConfigError("config not found: " + path_or_name + " (or use 'paperlike')");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json_string(buffer.str());
}

GeneratedDataset generate(const ScenarioConfig& config, std::uint64_t seed) {
  validate_config(config);

  GeneratedDataset out;
  Dataset& dataset = out.dataset;
  for (int c = 0; c < config.n_classes; ++c) {
    dataset.labels.push_back({c, "class_" + std::to_string(c)});
  }
  for (const auto& deficit : config.deficits) {
    dataset.qf_schema.fields.push_back({deficit.name, QfKind::ordinal});
  }
  dataset.split = Split::train;
  dataset.series.reserve(config.n_series);
  out.latent_error_prob.reserve(config.n_series);

  const int width = static_cast<int>(std::to_string(config.n_series).size());
  for (int s = 0; s < config.n_series; ++s) {
    Rng rng = Rng::substream(seed, kSeriesStream, static_cast<std::uint64_t>(s));

    const int truth = static_cast<int>(rng.below(config.n_classes));
    // Persistent confusion class: systematic mistakes land on this label.
    int confusion = static_cast<int>(rng.below(config.n_classes - 1));
    if (confusion >= truth) ++confusion;

    std::vector<int> intensity(config.deficits.size());
    for (std::size_t d = 0; d < config.deficits.size(); ++d) {
      intensity[d] = rng.weighted(config.deficits[d].weights);
    }

    std::string id = std::to_string(s);
    id.insert(0, width - static_cast<int>(id.size()), '0');
    id.insert(0, "s");

    Timeseries series;
    series.series_id = id;
    series.steps.reserve(config.series_length);
    std::vector<double> latent;
    latent.reserve(config.series_length);

    bool prev_error = false;
    double prev_p = 0.0;
    for (int t = 0; t < config.series_length; ++t) {
      for (std::size_t d = 0; d < config.deficits.size(); ++d) {
        if (t > 0 && config.deficits[d].varying && rng.bernoulli(config.varying_change_prob)) {
          intensity[d] = rng.weighted(config.deficits[d].weights);
        }
      }
      double p = config.base_curve[t];
      for (std::size_t d = 0; d < config.deficits.size(); ++d) {
        p *= config.deficits[d].multipliers[intensity[d]];
      }
      p = std::clamp(p, kMinErrorProb, kMaxErrorProb);
      latent.push_back(p);

      // Markov chain with lag-1 correlation indicator_correlation whose
      // stepwise marginals stay exactly p.
      double draw_p = p;
      if (t > 0 && config.indicator_correlation > 0.0) {
        const double rho = config.indicator_correlation;
        const double sd = std::sqrt(p * (1.0 - p));
        if (prev_error) {
          draw_p = p + rho * std::sqrt((1.0 - prev_p) / prev_p) * sd;
        } else {
          draw_p = p - rho * std::sqrt(prev_p / (1.0 - prev_p)) * sd;
        }
        draw_p = std::clamp(draw_p, 0.0, 1.0);
      }
      const bool error = rng.bernoulli(draw_p);
      prev_error = error;
      prev_p = p;

      int outcome = truth;
      if (error) {
        if (rng.bernoulli(config.error_correlation)) {
          outcome = confusion;
        } else {
          int wrong = static_cast<int>(rng.below(config.n_classes - 1));
          if (wrong >= truth) ++wrong;
          outcome = wrong;
        }
      }

      StepRecord rec;
      rec.series_id = id;
      rec.step_index = t;
      rec.truth = truth;
      rec.outcome = outcome;
      rec.qf.reserve(config.deficits.size());
      for (std::size_t d = 0; d < config.deficits.size(); ++d) {
        rec.qf.push_back(static_cast<double>(intensity[d]));
      }
      series.steps.push_back(std::move(rec));
    }
    dataset.series.push_back(std::move(series));
    out.latent_error_prob.push_back(std::move(latent));
  }
  return out;
}

std::array<Dataset, 3> split_dataset(const Dataset& dataset,
                                     const std::array<double, 3>& fractions,
                                     std::uint64_t seed) {
  double fraction_sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw DomainError("split fractions must be positive");
    fraction_sum += f;
  }
  if (std::abs(fraction_sum - 1.0) > 1e-9) throw DomainError("split fractions must sum to 1");

  const std::size_t n = dataset.series.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::substream(seed, kSplitStream, 0);
  for (std::size_t i = n; i > 1; --i) {  // Fisher-Yates
    const std::size_t j = rng.below(i);
    std::swap(order[i - 1], order[j]);
  }

  // Tolerant floor: intended-exact products like 1307 * (522/1307) must not
  // land one below the integer through rounding.
  const auto sized = [n](double fraction) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
  };
  const std::size_t n_train = sized(fractions[0]);
  const std::size_t n_cal = sized(fractions[1]);

  std::array<std::vector<std::size_t>, 3> members;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t part = i < n_train ? 0 : (i < n_train + n_cal ? 1 : 2);
    members[part].push_back(order[i]);
  }

  std::array<Dataset, 3> splits;
  const std::array<Split, 3> tags = {Split::train, Split::calibration, Split::test};
  for (std::size_t part = 0; part < 3; ++part) {
    splits[part].labels = dataset.labels;
    splits[part].qf_schema = dataset.qf_schema;
    splits[part].split = tags[part];
    std::sort(members[part].begin(), members[part].end());
    for (std::size_t idx : members[part]) {
      splits[part].series.push_back(dataset.series[idx]);
    }
  }
  return splits;
}

Timeseries subsample_series(const Timeseries& series, int target_length, std::uint64_t seed) {
  const int length = static_cast<int>(series.steps.size());
  if (target_length < 1) throw DomainError("subsample_series: target_length must be >= 1");
  if (length < target_length) {
    throw DomainError("subsample_series: series shorter than target_length");
  }
  Rng rng(seed);
  const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(length - target_length + 1)));

  Timeseries out;
  out.series_id = series.series_id;
  out.steps.reserve(target_length);
  for (int t = 0; t < target_length; ++t) {
    StepRecord rec = series.steps[start + t];
    rec.step_index = t;
    out.steps.push_back(std::move(rec));
  }
  return out;
}

}  // namespace tauw::simgen
