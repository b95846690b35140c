#include "gnnanatomy/solvable.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gnnanatomy {

namespace {

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

void check_domain(std::uint64_t n, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("binomial success probability must lie in (0, 1)");
  if (n > (1ull << 40)) throw std::domain_error("binomial trial count too large");
}

constexpr double kTailRelativeTolerance = 1e-12;

}  // namespace

double binom_upper_tail(std::uint64_t n, std::uint64_t k, double p) {
  check_domain(n, p);
  if (k > n) throw std::domain_error("binom_upper_tail: k > n");
  if (k == 0) return 1.0;

  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  // Terms are unimodal with the mode at floor((n+1)p); the largest term in
  // [k, n] is at max(k, mode). Summing relative to it keeps every ratio <= 1.
  const auto mode = static_cast<std::uint64_t>(std::floor(static_cast<double>(n + 1) * p));
  const std::uint64_t peak = std::clamp(mode, k, n);
  auto log_term = [&](std::uint64_t i) {
    return log_choose(n, i) + static_cast<double>(i) * log_p + static_cast<double>(n - i) * log_q;
  };
  const double log_peak = log_term(peak);

  // Walk outwards from the peak with the exact term ratio, accumulating the
  // small terms first on each side.
  const double odds = p / (1.0 - p);
  double upper = 0.0;
  {
    std::vector<double> terms;
    double t = 1.0;
    for (std::uint64_t i = peak; i < n; ++i) {
      t *= odds * static_cast<double>(n - i) / static_cast<double>(i + 1);
      if (t < 1e-300) break;
      terms.push_back(t);
    }
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) upper += *it;
  }
  double lower = 0.0;
  {
    std::vector<double> terms;
    double t = 1.0;
    for (std::uint64_t i = peak; i > k; --i) {
      t *= static_cast<double>(i) / (odds * static_cast<double>(n - i + 1));
      if (t < 1e-300) break;
      terms.push_back(t);
    }
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) lower += *it;
  }
  const double log_tail = log_peak + std::log1p(upper + lower);
  return std::min(1.0, std::exp(log_tail));
}

std::uint64_t critical_count(std::uint64_t n, double p, double alpha) {
  check_domain(n, p);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0, 1)");
  // Tails within the evaluation error of alpha count as equal to it, so exact
  // boundary cases such as P(X >= 3 | n = 3, p = 1/10) = 1/1000 stay significant.
  const double limit = alpha * (1.0 + kTailRelativeTolerance);
  // The tail is nonincreasing in k, so bisect on [0, n + 1].
  std::uint64_t lo = 0;
  std::uint64_t hi = n + 1;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (binom_upper_tail(n, mid, p) <= limit) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

double SolvableSet::ratio() const {
  return universe_size == 0 ? 0.0 : static_cast<double>(prediction_ids.size()) / static_cast<double>(universe_size);
}

SolvableSet solvable_set(const RunMatrix& runs, double alpha) {
  if (runs.num_classes < 2) throw std::invalid_argument("solvable_set: need at least 2 classes");
  if (runs.n_runs() == 0) throw std::invalid_argument("solvable_set: run matrix has no runs");
  if (runs.prediction_ids.size() != runs.n_predictions()) {
    throw std::invalid_argument("solvable_set: prediction_ids length does not match the matrix");
  }
  SolvableSet set;
  set.dataset_name = runs.dataset_name;
  set.model_name = runs.model_name;
  set.universe_size = runs.n_predictions();
  set.alpha = alpha;
  set.n_runs = runs.n_runs();
  set.num_classes = runs.num_classes;
  set.critical_count = critical_count(runs.n_runs(), 1.0 / static_cast<double>(runs.num_classes), alpha);
  for (std::size_t i = 0; i < runs.n_predictions(); ++i) {
    if (runs.column_count(i) >= set.critical_count) set.prediction_ids.push_back(runs.prediction_ids[i]);
  }
  std::sort(set.prediction_ids.begin(), set.prediction_ids.end());
  return set;
}

}  // namespace gnnanatomy
