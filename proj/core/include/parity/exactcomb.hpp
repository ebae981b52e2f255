#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <utility>
#include <vector>

#include "parity/activation.hpp"

namespace parity {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Signed magnitude in log space: value = sign * exp(log_abs).
struct LogValue {
  int sign = 0;
  double log_abs = 0.0;

  double value() const;
};

Rational to_rational(double x);  // exact, x must be finite
double to_double(const Rational& q);
LogValue to_log_value(const Rational& q);

BigInt binom(std::int64_t n, std::int64_t k);

// Direct sum of (-1)^k C(d,k) (or (-1)^k k C(d,k) when weighted) over
// c <= k <= c_hi. Requires 1 < c <= c_hi <= d.
BigInt alt_binom_sum(int d, int c, int c_hi, bool weighted);

// 2^-pow2 * sum_j coef_j * C(m, j). Every closed form in this module reduces
// to this shape, which supports both exact and log-space evaluation.
struct BinomialCombination {
  std::int64_t m = 0;
  int pow2 = 0;
  std::vector<std::pair<std::int64_t, Rational>> terms;

  void add(std::int64_t j, const Rational& coef);
  Rational exact() const;
  // Factors out the largest binomial and keeps the small ratios exact, so the
  // only rounding is in one log-binomial (relative error ~1e-12 at d = 2000).
  LogValue log_space() const;
};

struct DeltaQuery {
  int d = 2;
  int a = 0;
  double b = 0.0;
  Activation act;
};

// Delta^(a)_{d,b}: E_x[(-1)^{#(-1) in x_1..x_{d-a}} act(sum_j x_j + b)].
BinomialCombination delta_combination(const DeltaQuery& q);
Rational delta_exact(const DeltaQuery& q);
double delta(const DeltaQuery& q);
LogValue delta_log(const DeltaQuery& q);

enum class OracleMode { enumerate, binomial };
double delta_oracle(const DeltaQuery& q, OracleMode mode);

// A_0(d,k) = 2^-d C(d, n-k), A_a(d,k) = A_{a-1}(d,k) - A_{a-1}(d,k+1), n = floor(d/2).
enum class LadderMode { recursive, expanded };
Rational a_ladder_exact(int a, int d, int k, LadderMode mode);
double a_ladder(int a, int d, int k, LadderMode mode);
LogValue a_ladder_log(int a, int d, int k);

// Coefficient of the bias term in the a > 0 expansion of Delta.
BinomialCombination b_coeff_combination(int d, int c, int a);
Rational b_coeff_exact(int d, int c, int a);
double b_coeff(int d, int c, int a);
LogValue b_coeff_log(int d, int c, int a);
// Same quantity through A_a(d-a-2, .); needs c >= a + 2 for the ladder range.
Rational b_coeff_via_ladder(int d, int c, int a);

// ceil((d - b) / 2), the first index where the shifted walk is nonnegative.
std::int64_t walk_threshold(int d, double b);

// Hidden-bias choices for one-step learning: 0 for even d, -1 for odd d.
double parity_bias(int d);
// The randomized bias a + 2 or a + 2.1, picked by a fair coin.
double coin_bias(int a, bool shifted);

}  // namespace parity
