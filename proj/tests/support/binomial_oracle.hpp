#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace gnnanatomy::testing {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

/// Exact upper tails of Binomial(n, 1/q): tails[k] = P(X >= k) for k in
/// [0, n + 1], as numerators over the common denominator q^n.
struct ExactTails {
  std::vector<cpp_int> numerators;
  cpp_int denominator;

  double value(std::uint64_t k) const {
    return static_cast<double>(cpp_rational(numerators[k], denominator));
  }
  /// tail(k) <= num / den, compared exactly.
  bool at_most(std::uint64_t k, std::uint64_t num, std::uint64_t den) const {
    return numerators[k] * den <= denominator * num;
  }
  /// Smallest k with tail(k) <= num / den, or n + 1.
  std::uint64_t threshold(std::uint64_t num, std::uint64_t den) const {
    for (std::uint64_t k = 0; k < numerators.size(); ++k) {
      if (at_most(k, num, den)) return k;
    }
    return numerators.size() - 1;
  }
};

/// Brute-force summation of C(n, j) (q - 1)^(n - j) over j >= k.
inline ExactTails exact_tails(std::uint64_t n, std::uint64_t q) {
  std::vector<cpp_int> terms(n + 1);
  cpp_int choose = 1;
  for (std::uint64_t j = 0; j <= n; ++j) {
    if (j > 0) choose = choose * (n - j + 1) / j;
    terms[j] = choose * boost::multiprecision::pow(cpp_int(q - 1), static_cast<unsigned>(n - j));
  }
  ExactTails out;
  out.numerators.assign(n + 2, 0);
  for (std::uint64_t j = n + 1; j-- > 0;) out.numerators[j] = out.numerators[j + 1] + terms[j];
  out.denominator = boost::multiprecision::pow(cpp_int(q), static_cast<unsigned>(n));
  return out;
}

}  // namespace gnnanatomy::testing
