#include "tauw/fusion.hpp"

#include <algorithm>

namespace tauw::fusion {

FusedOutcome majority_vote(std::span<const int> outcomes) {
  if (outcomes.empty()) throw DomainError("majority_vote: outcomes must be non-empty");

  FusedOutcome out;
  std::map<int, std::size_t> last_seen;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    out.vote_counts[outcomes[i]] += 1;
    last_seen[outcomes[i]] = i;
  }

  std::int64_t max_count = 0;
  for (const auto& [label, count] : out.vote_counts) max_count = std::max(max_count, count);

  int winner = 0;
  std::size_t winner_recency = 0;
  int n_tied = 0;
  for (const auto& [label, count] : out.vote_counts) {
    if (count != max_count) continue;
    ++n_tied;
    const std::size_t recency = last_seen[label];
    if (n_tied == 1 || recency > winner_recency) {
      winner = label;
      winner_recency = recency;
    }
  }
  out.label = winner;
  out.tie_broken = n_tied >= 2;
  return out;
}

namespace {

void check_uncertainties(std::span<const double> uncertainties) {
  if (uncertainties.empty()) throw DomainError("uncertainty fusion: list must be non-empty");
  for (double u : uncertainties) {
    if (!(u >= 0.0 && u <= 1.0)) {
      throw DomainError("uncertainty fusion: values must lie in [0,1]");
    }
  }
}

}  // namespace

double naive_uf(std::span<const double> uncertainties) {
  check_uncertainties(uncertainties);
  double product = 1.0;
  for (double u : uncertainties) product *= u;
  return product;
}

double opportune_uf(std::span<const double> uncertainties) {
  check_uncertainties(uncertainties);
  return *std::min_element(uncertainties.begin(), uncertainties.end());
}

double worstcase_uf(std::span<const double> uncertainties) {
  check_uncertainties(uncertainties);
  return *std::max_element(uncertainties.begin(), uncertainties.end());
}

}  // namespace tauw::fusion
