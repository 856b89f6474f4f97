#pragma once

#include <span>
#include <string>
#include <vector>

#include "tauw/eval.hpp"
#include "tauw/qim.hpp"
#include "tauw/simgen.hpp"
#include "tauw/wrapper.hpp"

namespace tauw::pipeline {

struct SimulatedData {
  Dataset train;
  Dataset calibration;
  Dataset test;
};

/// generate -> series-level split -> window subsampling of calibration and
/// test. All randomness derives from the one seed.
SimulatedData simulate(const simgen::ScenarioConfig& config, std::uint64_t seed);

struct Models {
  qim::CalibratedTree stateless;
  qim::CalibratedTree tauw;
};

/// Comma-separated taQF subset ("" for none); validates the names.
std::vector<std::string> parse_taqf_subset(const std::string& csv);

/// Fits and calibrates the stateless tree on per-step failures, then the
/// timeseries-aware tree on fused-outcome failures with the chosen taQF
/// subset appended to the stateless factors.
Models fit(const Dataset& train, const Dataset& calibration, const qim::QimParams& params,
           std::span<const std::string> taqf_subset);

enum class FusionMode { none, fused };
enum class UfMode { none, naive, opportune, worstcase, tauw };

FusionMode fusion_mode_from_string(const std::string& s);
UfMode uf_mode_from_string(const std::string& s);

/// Scored cases for one evaluation condition. Without fusion the stateless
/// estimate is scored against the isolated outcome; with fusion the chosen
/// uncertainty-fusion rule (or the current stateless estimate, for none) is
/// scored against the fused outcome.
std::vector<eval::ScoredCase> condition_cases(std::span<const wrapper::SeriesReplay> replays,
                                              FusionMode fusion, UfMode uf);

std::vector<std::vector<eval::StepOutcome>> step_outcomes(
    std::span<const wrapper::SeriesReplay> replays);

}  // namespace tauw::pipeline
