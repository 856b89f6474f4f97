#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "tauw/errors.hpp"

namespace tauw::fusion {

/// Result of fusing a sequence of outcomes. `label` holds a maximal vote
/// count; when several labels tie, the one seen most recently wins and
/// `tie_broken` is set.
struct FusedOutcome {
  int label = 0;
  std::map<int, std::int64_t> vote_counts;
  bool tie_broken = false;
};

/// Majority vote over the outcomes observed so far. Ties between maximal
/// vote counts go to the label whose latest occurrence is most recent.
FusedOutcome majority_vote(std::span<const int> outcomes);

/// Product of the per-step uncertainties (treats them as independent).
double naive_uf(std::span<const double> uncertainties);

/// Minimum of the per-step uncertainties.
double opportune_uf(std::span<const double> uncertainties);

/// Maximum of the per-step uncertainties.
double worstcase_uf(std::span<const double> uncertainties);

}  // namespace tauw::fusion
