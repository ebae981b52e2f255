#include "parity/exactcomb.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "parity/errors.hpp"

namespace parity {
namespace {

const double kLn2 = std::log(2.0);

BigInt floor_div(const BigInt& n, const BigInt& d) {
  BigInt q = n / d;
  if (n % d != 0 && ((n < 0) != (d < 0))) q -= 1;
  return q;
}

BigInt floor_of(const Rational& q) {
  return floor_div(numerator(q), denominator(q));
}

BigInt ceil_of(const Rational& q) { return -floor_of(-q); }

Rational pow2_rational(int e) {
  BigInt p = 1;
  p <<= std::abs(e);
  return e >= 0 ? Rational(p) : Rational(1, p);
}

// log(|n|) for a nonzero big integer using its top 64 bits.
double log_abs_int(BigInt n) {
  if (n < 0) n = -n;
  const std::int64_t top = static_cast<std::int64_t>(msb(n));
  if (top < 63) return std::log(n.convert_to<double>());
  BigInt head = n >> static_cast<unsigned>(top - 63);
  return std::log(head.convert_to<double>()) + static_cast<double>(top - 63) * kLn2;
}

long double log_binom(std::int64_t m, std::int64_t j) {
  return std::lgamma(static_cast<long double>(m) + 1.0L) -
         std::lgamma(static_cast<long double>(j) + 1.0L) -
         std::lgamma(static_cast<long double>(m - j) + 1.0L);
}

int sign_pow(std::int64_t e) { return (e % 2 == 0) ? 1 : -1; }

void check_closed_form_query(const DeltaQuery& q) {
  if (q.act.kind == Activation::Kind::threshold) {
    throw std::invalid_argument("delta: no closed form for the threshold activation");
  }
  if (q.a < 0) throw std::invalid_argument("delta: co-degree a must be >= 0");
  if (q.d - q.a < 2) throw std::invalid_argument("delta: closed form needs d - a >= 2");
  if (!std::isfinite(q.b)) throw std::invalid_argument("delta: bias must be finite");
}

// Adds w * Delta^(0)_{d0,b0} with an outer 2^-d0 that the caller accounts for.
void add_delta0(BinomialCombination& comb, int d0, const Rational& b0, const Activation& act,
                const BigInt& w) {
  const Rational dd = d0;
  const BigInt c = ceil_of((dd - b0) / 2);
  if (c >= -2 && c <= d0 + 2) {
    const auto ci = c.convert_to<std::int64_t>();
    const int s = sign_pow(d0 + ci);
    comb.add(ci - 2, Rational(s) * (dd + b0) * Rational(w));
    comb.add(ci - 1, Rational(-s) * (dd - b0) * Rational(w));
  }
  if (act.kind == Activation::Kind::clipped_relu) {
    const Rational clip = to_rational(act.clip);
    const BigInt cp = floor_of((dd - b0 + clip) / 2);
    if (cp >= -2 && cp <= d0 + 2) {
      const auto ci = cp.convert_to<std::int64_t>();
      const int s = sign_pow(d0 + ci);
      comb.add(ci - 1, Rational(s) * (dd + b0 - clip) * Rational(w));
      comb.add(ci, Rational(-s) * (dd - b0 + clip) * Rational(w));
    }
  }
}

void check_ladder_range(int a, int d, int k) {
  if (a < 0 || d < 0) throw std::out_of_range("a_ladder: a and d must be >= 0");
  const int n = d / 2;
  if (k < n - d || k > n - a) {
    throw std::out_of_range("a_ladder: k=" + std::to_string(k) + " outside [" +
                            std::to_string(n - d) + ", " + std::to_string(n - a) + "]");
  }
}

BinomialCombination a_ladder_combination(int a, int d, int k) {
  BinomialCombination comb;
  comb.m = d;
  comb.pow2 = d;
  const int n = d / 2;
  for (int l = 0; l <= a; ++l) {
    comb.add(n - k - l, Rational(sign_pow(l) * binom(a, l)));
  }
  return comb;
}

}  // namespace

double LogValue::value() const {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_abs);
}

Rational to_rational(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("to_rational: non-finite value");
  if (x == 0.0) return Rational(0);
  int e = 0;
  const double m = std::frexp(x, &e);
  const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  return Rational(mant) * pow2_rational(e - 53);
}

double to_double(const Rational& q) {
  const BigInt& num = numerator(q);
  const BigInt& den = denominator(q);
  if (num == 0) return 0.0;
  const bool neg = num < 0;
  BigInt n = neg ? BigInt(-num) : num;
  BigInt d = den;
  // Scale so the integer quotient carries 64+ significant bits.
  const std::int64_t e = static_cast<std::int64_t>(msb(n)) - static_cast<std::int64_t>(msb(d));
  const std::int64_t shift = 64 - e;
  if (shift > 0) {
    n <<= static_cast<unsigned>(shift);
  } else if (shift < 0) {
    d <<= static_cast<unsigned>(-shift);
  }
  BigInt quo = n / d;
  if (n % d != 0) quo |= 1;  // sticky bit for correct rounding
  const double r = std::ldexp(quo.convert_to<double>(), static_cast<int>(-shift));
  return neg ? -r : r;
}

LogValue to_log_value(const Rational& q) {
  if (q == 0) return {0, -std::numeric_limits<double>::infinity()};
  LogValue v;
  v.sign = q > 0 ? 1 : -1;
  v.log_abs = log_abs_int(numerator(q)) - log_abs_int(denominator(q));
  return v;
}

BigInt binom(std::int64_t n, std::int64_t k) {
  if (n < 0) throw std::invalid_argument("binom: n must be >= 0");
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

BigInt alt_binom_sum(int d, int c, int c_hi, bool weighted) {
  if (c <= 1) throw std::invalid_argument("alt_binom_sum: requires c > 1");
  if (c > c_hi || c_hi > d) throw std::invalid_argument("alt_binom_sum: requires c <= c_hi <= d");
  BigInt sum = 0;
  BigInt ck = binom(d, c);
  for (int k = c; k <= c_hi; ++k) {
    BigInt term = weighted ? BigInt(ck * k) : ck;
    if (k % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
    ck = ck * (d - k) / (k + 1);
  }
  return sum;
}

void BinomialCombination::add(std::int64_t j, const Rational& coef) {
  if (coef == 0) return;
  for (auto& [jj, cc] : terms) {
    if (jj == j) {
      cc += coef;
      return;
    }
  }
  terms.emplace_back(j, coef);
}

Rational BinomialCombination::exact() const {
  Rational sum = 0;
  for (const auto& [j, coef] : terms) {
    if (j < 0 || j > m) continue;
    sum += coef * Rational(binom(m, j));
  }
  return sum * pow2_rational(-pow2);
}

LogValue BinomialCombination::log_space() const {
  std::int64_t pivot = -1;
  for (const auto& [j, coef] : terms) {
    if (j < 0 || j > m || coef == 0) continue;
    if (pivot < 0 || std::llabs(2 * j - m) < std::llabs(2 * pivot - m)) pivot = j;
  }
  if (pivot < 0) return {0, -std::numeric_limits<double>::infinity()};
  Rational s = 0;
  for (const auto& [j, coef] : terms) {
    if (j < 0 || j > m || coef == 0) continue;
    // C(m,j)/C(m,pivot) as an exact product of short factors.
    Rational ratio = 1;
    for (std::int64_t i = pivot + 1; i <= j; ++i) ratio *= Rational(m - i + 1, i);
    for (std::int64_t i = j + 1; i <= pivot; ++i) ratio *= Rational(i, m - i + 1);
    s += coef * ratio;
  }
  LogValue v = to_log_value(s);
  if (v.sign == 0) return v;
  v.log_abs += static_cast<double>(log_binom(m, pivot) - static_cast<long double>(pow2) * std::log(2.0L));
  return v;
}

std::int64_t walk_threshold(int d, double b) {
  return ceil_of((Rational(d) - to_rational(b)) / 2).convert_to<std::int64_t>();
}

BinomialCombination delta_combination(const DeltaQuery& q) {
  check_closed_form_query(q);
  BinomialCombination comb;
  comb.m = q.d - q.a - 2;
  comb.pow2 = q.d;
  const Rational b = to_rational(q.b);
  for (int l = 0; l <= q.a; ++l) {
    add_delta0(comb, q.d - q.a, b - q.a + 2 * l, q.act, binom(q.a, l));
  }
  return comb;
}

Rational delta_exact(const DeltaQuery& q) { return delta_combination(q).exact(); }

double delta(const DeltaQuery& q) { return to_double(delta_exact(q)); }

LogValue delta_log(const DeltaQuery& q) { return delta_combination(q).log_space(); }

double delta_oracle(const DeltaQuery& q, OracleMode mode) {
  if (q.a < 0 || q.d - q.a < 1) throw std::invalid_argument("delta_oracle: need 0 <= a < d");
  const int d = q.d;
  const int head = d - q.a;
  if (mode == OracleMode::enumerate) {
    if (d > kMaxEnumerateDim) {
      throw ResourceLimitError("delta_oracle: enumeration limited to d <= " +
                               std::to_string(kMaxEnumerateDim));
    }
    const std::uint32_t head_mask = (head >= 32) ? ~0u : ((1u << head) - 1u);
    long double sum = 0.0L;
    for (std::uint32_t x = 0; x < (1u << d); ++x) {
      // Bit set means coordinate is -1.
      const int minus = std::popcount(x);
      const double s = static_cast<double>(d - 2 * minus) + q.b;
      const long double v = q.act(s);
      if (std::popcount(x & head_mask) % 2 == 0) {
        sum += v;
      } else {
        sum -= v;
      }
    }
    return static_cast<double>(std::ldexp(sum, -d));
  }
  const int tail = q.a;
  long double sum = 0.0L;
  for (int k1 = 0; k1 <= head; ++k1) {
    const long double l1 = log_binom(head, k1);
    for (int k2 = 0; k2 <= tail; ++k2) {
      const long double w = std::exp(l1 + log_binom(tail, k2) - d * std::log(2.0L));
      const double s = static_cast<double>(d - 2 * k1 - 2 * k2) + q.b;
      const long double v = w * q.act(s);
      sum += (k1 % 2 == 0) ? v : -v;
    }
  }
  return static_cast<double>(sum);
}

Rational a_ladder_exact(int a, int d, int k, LadderMode mode) {
  check_ladder_range(a, d, k);
  if (mode == LadderMode::expanded) return a_ladder_combination(a, d, k).exact();
  const int n = d / 2;
  const Rational scale = pow2_rational(-d);
  std::vector<Rational> row(a + 1);
  for (int i = 0; i <= a; ++i) row[i] = scale * Rational(binom(d, n - (k + i)));
  for (int level = 1; level <= a; ++level) {
    for (int i = 0; i + level <= a; ++i) row[i] = row[i] - row[i + 1];
  }
  return row[0];
}

double a_ladder(int a, int d, int k, LadderMode mode) {
  return to_double(a_ladder_exact(a, d, k, mode));
}

LogValue a_ladder_log(int a, int d, int k) {
  check_ladder_range(a, d, k);
  return a_ladder_combination(a, d, k).log_space();
}

BinomialCombination b_coeff_combination(int d, int c, int a) {
  if (a < 0 || d - a - 2 < 0) throw std::out_of_range("b_coeff: need a >= 0 and d - a >= 2");
  BinomialCombination comb;
  comb.m = d - a - 2;
  comb.pow2 = d;
  const int s = sign_pow(static_cast<std::int64_t>(d) - a + c);
  for (int l = 0; l <= a; ++l) {
    const Rational coef(s * sign_pow(l) * binom(a, l));
    comb.add(static_cast<std::int64_t>(c) - l - 2, coef);
    comb.add(static_cast<std::int64_t>(c) - l - 1, coef);
  }
  return comb;
}

Rational b_coeff_exact(int d, int c, int a) { return b_coeff_combination(d, c, a).exact(); }

double b_coeff(int d, int c, int a) { return to_double(b_coeff_exact(d, c, a)); }

LogValue b_coeff_log(int d, int c, int a) { return b_coeff_combination(d, c, a).log_space(); }

Rational b_coeff_via_ladder(int d, int c, int a) {
  const int m = d - a - 2;
  if (m < 0) throw std::out_of_range("b_coeff: need d - a >= 2");
  const int n = m / 2;
  const Rational sum = a_ladder_exact(a, m, n - c + 2, LadderMode::recursive) +
                       a_ladder_exact(a, m, n - c + 1, LadderMode::recursive);
  return Rational(sign_pow(static_cast<std::int64_t>(d) - a + c)) * sum * pow2_rational(-(a + 2));
}

double parity_bias(int d) { return d % 2 == 0 ? 0.0 : -1.0; }

double coin_bias(int a, bool shifted) { return a + 2.0 + (shifted ? 0.1 : 0.0); }

}  // namespace parity
