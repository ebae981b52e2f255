#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "parity/errors.hpp"
#include "parity/exactcomb.hpp"

using namespace parity;

namespace {

const std::vector<Activation> kActs = {Activation::relu(), Activation::clipped(5.0)};

double rel_err(double x, double ref) { return std::fabs(x - ref) / std::max(std::fabs(ref), 1e-300); }

}  // namespace

TEST(Binom, SmallValuesAndConvention) {
  EXPECT_EQ(binom(5, 2), 10);
  EXPECT_EQ(binom(7, -1), 0);
  EXPECT_EQ(binom(7, 8), 0);
  EXPECT_EQ(binom(0, 0), 1);
  EXPECT_EQ(binom(30, 15), BigInt(155117520));
}

TEST(Binom, MatchesPascalTriangle) {
  for (int n = 0; n <= 120; ++n) {
    const auto row = oracle::pascal_row(n);
    for (int k = 0; k <= n; ++k) ASSERT_EQ(binom(n, k), row[k]) << n << "," << k;
  }
}

TEST(AltBinomSum, Examples) {
  EXPECT_EQ(alt_binom_sum(6, 2, 6, false), 5);
  EXPECT_EQ(alt_binom_sum(4, 2, 3, false), binom(4, 2) - binom(4, 3));
  for (int d = 1; d <= 30; ++d) EXPECT_EQ(oracle::full_alternating_sum(d), 0);
}

TEST(AltBinomSum, RejectsBadRanges) {
  EXPECT_THROW(alt_binom_sum(6, 1, 6, false), std::invalid_argument);
  EXPECT_THROW(alt_binom_sum(6, 4, 3, false), std::invalid_argument);
  EXPECT_THROW(alt_binom_sum(6, 2, 7, false), std::invalid_argument);
}

TEST(AltBinomSum, PartialSumIdentities) {
  auto sgn = [](int k) { return k % 2 ? -1 : 1; };
  for (int d = 2; d <= 40; ++d) {
    for (int c = 2; c <= d; ++c) {
      ASSERT_EQ(alt_binom_sum(d, c, d, false), sgn(c) * binom(d - 1, c - 1));
      ASSERT_EQ(alt_binom_sum(d, c, d, true), sgn(c) * d * binom(d - 2, c - 2));
      for (int cp = c; cp <= d; ++cp) {
        ASSERT_EQ(alt_binom_sum(d, c, cp, false), sgn(c) * binom(d - 1, c - 1) + sgn(cp) * binom(d - 1, cp));
        ASSERT_EQ(alt_binom_sum(d, c, cp, true),
                  sgn(c) * d * binom(d - 2, c - 2) + sgn(cp) * d * binom(d - 2, cp - 1));
      }
    }
  }
}

TEST(AltBinomSum, PolynomialCancellation) {
  for (int d = 1; d <= 20; ++d)
    for (int p = 0; p < d; ++p) ASSERT_EQ(oracle::alternating_power_sum(d, p), 0) << d << "," << p;
  // Degree d is the first power that survives: (-1)^d d!.
  EXPECT_NE(oracle::alternating_power_sum(6, 6), 0);
}

TEST(Delta, ClosedFormValues) {
  EXPECT_NEAR(std::fabs(delta({4, 0, 0.0, Activation::relu()})), 0.25, 1e-15);
  EXPECT_NEAR(std::fabs(delta({5, 0, -1.0, Activation::relu()})), 0.1875, 1e-15);
  for (int d = 6; d <= 60; d += 2) {
    const Rational expect = Rational(4 * binom(d - 3, d / 2 - 1)) / pow(BigInt(2), d);
    EXPECT_EQ(abs(delta_exact({d, 0, 0.0, Activation::relu()})), expect) << d;
  }
  for (int d = 5; d <= 61; d += 2) {
    const Rational expect = Rational(binom(d - 1, (d - 1) / 2)) / pow(BigInt(2), d);
    EXPECT_EQ(abs(delta_exact({d, 0, -1.0, Activation::relu()})), expect) << d;
  }
}

TEST(Delta, ClippedClosedFormValues) {
  for (int d = 8; d <= 40; d += 2) {
    const Rational expect = abs(Rational(-4 * binom(d - 3, d / 2 - 1)) +
                                Rational(5 * binom(d - 1, d / 2 + 2), d - 1)) /
                            pow(BigInt(2), d);
    EXPECT_EQ(abs(delta_exact({d, 0, 0.0, Activation::clipped(5)})), expect) << d;
  }
  // Odd d: second binomial is C(d - 1, (d - 7) / 2), checked against enumeration up to d = 41.
  for (int d = 9; d <= 41; d += 2) {
    const Rational expect = abs(Rational(-binom(d - 1, (d - 1) / 2)) +
                                Rational(6 * binom(d - 1, (d - 7) / 2), d - 1)) /
                            pow(BigInt(2), d);
    EXPECT_EQ(abs(delta_exact({d, 0, -1.0, Activation::clipped(5)})), expect) << d;
  }
}

TEST(Delta, AlmostFullClosedFormValues) {
  const auto relu = Activation::relu();
  for (int d = 6; d <= 30; d += 2) {
    const Rational two_d = pow(BigInt(2), d);
    EXPECT_EQ(abs(delta_exact({d, 1, -2.0, relu})), Rational(2 * binom(d - 1, d / 2), d - 1) / two_d) << d;
    EXPECT_EQ(abs(delta_exact({d, 2, -2.0, relu})),
              Rational(2 * (d - 6) * binom(d - 2, d / 2), (d - 3) * (d - 2)) / two_d)
        << d;
  }
  for (int d = 7; d <= 31; d += 2) {
    const Rational two_d = pow(BigInt(2), d);
    EXPECT_EQ(abs(delta_exact({d, 2, -1.0, relu})), Rational(2 * binom(d - 2, (d - 1) / 2), d - 2) / two_d)
        << d;
  }
}

TEST(Delta, MatchesEnumerationGrid) {
  for (int d = 2; d <= 14; ++d)
    for (int a = 0; a <= 2; ++a) {
      if (d - a < 2) continue;
      for (double b : {-2.0, -1.0, 0.0, a + 2.0, a + 2.1})
        for (const auto& act : kActs) {
          const DeltaQuery q{d, a, b, act};
          ASSERT_NEAR(delta(q), delta_oracle(q, OracleMode::enumerate), 1e-12)
              << d << " " << a << " " << b << " " << act.name();
        }
    }
}

TEST(Delta, MatchesBinomialOracleAtLargerD) {
  for (int d : {20, 33, 60, 101})
    for (int a = 0; a <= 3; ++a)
      for (double b : {-1.0, 0.0, a + 2.0, a + 2.1, 3.7})
        for (const auto& act : kActs) {
          const DeltaQuery q{d, a, b, act};
          const double ref = delta_oracle(q, OracleMode::binomial);
          ASSERT_NEAR(delta(q), ref, 1e-12 * std::max(1.0, std::fabs(ref) * 1e3)) << d << " " << a << " " << b;
        }
  const double v = delta_oracle({60, 2, 4.1, Activation::relu()}, OracleMode::binomial);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NE(v, 0.0);
}

TEST(Delta, ExampleWithCoDegree) {
  const DeltaQuery q{10, 1, 3.0, Activation::relu()};
  EXPECT_NEAR(delta(q), delta_oracle(q, OracleMode::enumerate), 1e-12);
}

TEST(Delta, OracleSupportsThresholdButClosedFormDoesNot) {
  const DeltaQuery q{8, 0, 0.0, Activation::threshold()};
  EXPECT_THROW(delta(q), std::invalid_argument);
  EXPECT_NEAR(delta_oracle(q, OracleMode::enumerate), delta_oracle(q, OracleMode::binomial), 1e-15);
}

TEST(Delta, RejectsInvalidQueries) {
  EXPECT_THROW(delta({3, 2, 0.0, Activation::relu()}), std::invalid_argument);
  EXPECT_THROW(delta({8, -1, 0.0, Activation::relu()}), std::invalid_argument);
  EXPECT_THROW(delta({8, 0, NAN, Activation::relu()}), std::invalid_argument);
  EXPECT_THROW(delta_oracle({23, 0, 0.0, Activation::relu()}, OracleMode::enumerate), ResourceLimitError);
}

TEST(Delta, LogSpaceMatchesExact) {
  for (int d : {50, 120, 301})
    for (int a = 0; a <= 3; ++a)
      for (double b : {-1.0, 0.0, a + 2.0, a + 2.1})
        for (const auto& act : kActs) {
          const DeltaQuery q{d, a, b, act};
          const LogValue exact = to_log_value(delta_exact(q));
          const LogValue lg = delta_log(q);
          ASSERT_EQ(lg.sign, exact.sign);
          if (exact.sign == 0) continue;
          ASSERT_NEAR(lg.log_abs, exact.log_abs, 1e-10) << d << " " << a << " " << b;
        }
}

TEST(Delta, LogSpaceReachesLargeD) {
  const LogValue v = delta_log({2000, 0, 0.0, Activation::relu()});
  // |Delta| = 4 C(1997, 999) / 2^2000.
  const double expect = std::log(4.0) + std::lgamma(1998.0) - std::lgamma(1000.0) - std::lgamma(999.0) -
                        2000.0 * std::log(2.0);
  EXPECT_NE(v.sign, 0);
  EXPECT_NEAR(v.log_abs, expect, 1e-9);
}

TEST(Delta, AsymptoticSlopes) {
  std::vector<double> ds, v0, v1, v2;
  for (int d = 20; d <= 400; d += 4) {
    ds.push_back(d);
    v0.push_back(delta_log({d, 0, parity_bias(d), Activation::relu()}).value());
    v1.push_back(delta_log({d, 1, -2.0, Activation::relu()}).value());
    v2.push_back(delta_log({d, 2, -2.0, Activation::relu()}).value());
  }
  EXPECT_NEAR(oracle::loglog_slope(ds, v0), -0.5, 0.1);
  EXPECT_NEAR(oracle::loglog_slope(ds, v1), -1.5, 0.15);
  EXPECT_NEAR(oracle::loglog_slope(ds, v2), -1.5, 0.15);
}

TEST(ALadder, Examples) {
  EXPECT_EQ(a_ladder_exact(0, 8, 0, LadderMode::recursive), Rational(70, 256));
  EXPECT_DOUBLE_EQ(a_ladder(0, 8, 0, LadderMode::expanded), 0.2734375);
  EXPECT_EQ(a_ladder_exact(1, 8, 0, LadderMode::recursive),
            a_ladder_exact(0, 8, 0, LadderMode::expanded) - a_ladder_exact(0, 8, 1, LadderMode::expanded));
  EXPECT_GT(a_ladder(4, 500, 1, LadderMode::expanded), 0.0);
  EXPECT_EQ(a_ladder_log(4, 500, 1).sign, 1);
}

TEST(ALadder, RecursiveEqualsExpanded) {
  for (int a = 0; a <= 6; ++a)
    for (int d = a; d <= 30; ++d) {
      const int n = d / 2;
      for (int k = n - d; k <= n - a; ++k)
        ASSERT_EQ(a_ladder_exact(a, d, k, LadderMode::recursive), a_ladder_exact(a, d, k, LadderMode::expanded))
            << a << " " << d << " " << k;
    }
}

TEST(ALadder, SignPattern) {
  // The sign law is asymptotic: k + a/2 must be small against sqrt(d).
  for (int a = 0; a <= 6; ++a)
    for (int d : {2000, 3001, 5000}) {
      const int n = d / 2;
      for (int k = std::max(0, n - d); k <= std::min(3, n - a); ++k) {
        const int expect = (a / 2) % 2 ? -1 : 1;
        EXPECT_EQ(a_ladder_log(a, d, k).sign, expect) << a << " " << d << " " << k;
      }
    }
}

TEST(ALadder, RangeChecked) {
  EXPECT_THROW(a_ladder_exact(2, 10, 4, LadderMode::recursive), std::out_of_range);
  EXPECT_THROW(a_ladder_exact(0, 10, -6, LadderMode::expanded), std::out_of_range);
}

TEST(BCoeff, MatchesLadderIdentity) {
  EXPECT_EQ(b_coeff_exact(20, static_cast<int>(walk_threshold(20, 4.0)), 2), b_coeff_via_ladder(20, 8, 2));
  for (int a = 0; a <= 4; ++a)
    for (int d = 2 * a + 4; d <= 40; ++d)
      for (int c = a + 2; c <= d - a - 1; ++c)
        ASSERT_EQ(b_coeff_exact(d, c, a), b_coeff_via_ladder(d, c, a)) << d << " " << c << " " << a;
}

TEST(BCoeff, ZeroCoDegreeCollapses) {
  // a = 0: B = (-1)^{d+c} 2^-d [C(d-2, c-2) + C(d-2, c-1)] = (-1)^{d+c} 2^-d C(d-1, c-1).
  const Rational expect = Rational(binom(11, 6)) / 4096;
  EXPECT_EQ(b_coeff_exact(12, 7, 0), -expect);
}

TEST(BCoeff, DecaySlope) {
  const int a = 3;
  std::vector<double> ds, vs;
  for (int d = 100; d <= 2000; d += 50) {
    ds.push_back(d);
    vs.push_back(b_coeff_log(d, static_cast<int>(walk_threshold(d, a + 2.0)), a).value());
  }
  EXPECT_NEAR(oracle::loglog_slope(ds, vs), -2.5, 0.15);
}

TEST(BCoeff, LogMatchesExact) {
  for (int d : {60, 151, 300})
    for (int a = 0; a <= 4; ++a) {
      const int c = static_cast<int>(walk_threshold(d, a + 2.0));
      const LogValue exact = to_log_value(b_coeff_exact(d, c, a));
      const LogValue lg = b_coeff_log(d, c, a);
      ASSERT_EQ(exact.sign, lg.sign);
      ASSERT_NEAR(exact.log_abs, lg.log_abs, 1e-10);
    }
}

TEST(Conversions, RoundTrip) {
  for (double x : {0.0, 1.0, -0.1, 3.5e-300, 1e300, 4.9e-324})
    EXPECT_EQ(to_double(to_rational(x)), x);
  EXPECT_EQ(to_double(Rational(1, 3)), 1.0 / 3.0);
  EXPECT_EQ(to_double(Rational(-2, 7)), -2.0 / 7.0);
  EXPECT_EQ(to_log_value(Rational(0)).sign, 0);
}

TEST(Helpers, ThresholdsAndBiases) {
  EXPECT_EQ(walk_threshold(10, 0.0), 5);
  EXPECT_EQ(walk_threshold(11, -1.0), 6);
  EXPECT_EQ(walk_threshold(10, 2.1), 4);
  EXPECT_EQ(parity_bias(10), 0.0);
  EXPECT_EQ(parity_bias(11), -1.0);
  EXPECT_EQ(coin_bias(1, false), 3.0);
  EXPECT_EQ(coin_bias(1, true), 3.1);
}

TEST(Helpers, BinomialCombinationMergesTerms) {
  BinomialCombination c{6, 2, {}};
  c.add(3, Rational(1));
  c.add(3, Rational(2));
  c.add(-1, Rational(5));
  EXPECT_EQ(c.exact(), Rational(60, 4));
  EXPECT_NEAR(c.log_space().value(), 15.0, 1e-12);
}
