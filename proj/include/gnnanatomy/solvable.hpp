#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gnnanatomy/training.hpp"

namespace gnnanatomy {

inline constexpr double kDefaultAlpha = 0.001;

/// P(X >= k) for X ~ Binomial(n, p), summed term by term in log space.
/// Requires k <= n and 0 < p < 1.
double binom_upper_tail(std::uint64_t n, std::uint64_t k, double p);

/// Smallest k with binom_upper_tail(n, k, p) <= alpha, or n + 1 when no count
/// reaches significance. Tails within 1e-12 relative of alpha compare as equal.
std::uint64_t critical_count(std::uint64_t n, double p, double alpha);

/// Predictions a model gets right significantly more often than chance.
struct SolvableSet {
  std::string dataset_name;
  std::string model_name;
  std::vector<std::size_t> prediction_ids;  // ascending
  std::size_t universe_size = 0;
  double alpha = kDefaultAlpha;
  std::size_t n_runs = 0;
  int num_classes = 0;
  std::uint64_t critical_count = 0;

  std::size_t size() const { return prediction_ids.size(); }
  double ratio() const;

  friend bool operator==(const SolvableSet&, const SolvableSet&) = default;
};

/// One-sided test per prediction against Bernoulli(1/c) guessing, at a flat
/// level alpha with no multiple-testing correction.
SolvableSet solvable_set(const RunMatrix& runs, double alpha = kDefaultAlpha);

}  // namespace gnnanatomy
