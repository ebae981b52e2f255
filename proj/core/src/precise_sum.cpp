#include "precise_sum.hpp"

#include <gmp.h>
#include <mpfr.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace parity::detail {
namespace {

class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

class Mpz {
 public:
  explicit Mpz(const BigInt& x) {
    mpz_init(v_);
    mpz_set_str(v_, x.str().c_str(), 10);
  }
  ~Mpz() { mpz_clear(v_); }
  Mpz(Mpz&& o) noexcept {
    mpz_init(v_);
    mpz_swap(v_, o.v_);
  }
  Mpz(const Mpz&) = delete;
  Mpz& operator=(const Mpz&) = delete;
  mpz_srcptr get() const { return v_; }

 private:
  mpz_t v_;
};

void evaluate(mpfr_ptr out, const std::vector<Mpz>& w, int pow2, const AffineRho& rho,
              GaussKernel kernel, mpfr_prec_t prec) {
  Mpfr pi(prec), sig2(prec), denom(prec), r(prec), acos_r(prec), k(prec), tmp(prec), term(prec);
  mpfr_const_pi(pi.get(), MPFR_RNDN);
  mpfr_set_d(sig2.get(), rho.sigma_b, MPFR_RNDN);
  mpfr_sqr(sig2.get(), sig2.get(), MPFR_RNDN);
  mpfr_add_ui(denom.get(), sig2.get(), 1, MPFR_RNDN);
  mpfr_set_zero(out, 1);
  for (std::size_t t = 0; t < w.size(); ++t) {
    if (mpz_sgn(w[t].get()) == 0) continue;
    // rho_t
    mpfr_set_si(r.get(), rho.d - 2 * static_cast<long>(t), MPFR_RNDN);
    mpfr_div_si(r.get(), r.get(), rho.d, MPFR_RNDN);
    mpfr_mul_d(r.get(), r.get(), rho.alpha, MPFR_RNDN);
    mpfr_add_d(r.get(), r.get(), rho.beta, MPFR_RNDN);
    mpfr_add(r.get(), r.get(), sig2.get(), MPFR_RNDN);
    mpfr_div(r.get(), r.get(), denom.get(), MPFR_RNDN);
    if (mpfr_cmp_si(r.get(), 1) > 0) mpfr_set_si(r.get(), 1, MPFR_RNDN);
    if (mpfr_cmp_si(r.get(), -1) < 0) mpfr_set_si(r.get(), -1, MPFR_RNDN);

    mpfr_acos(acos_r.get(), r.get(), MPFR_RNDN);
    if (kernel == GaussKernel::step) {
      // 1/2 - acos(rho) / (2 pi)
      mpfr_set_d(tmp.get(), 0.5, MPFR_RNDN);
      mpfr_div(k.get(), acos_r.get(), pi.get(), MPFR_RNDN);
      mpfr_div_2ui(k.get(), k.get(), 1, MPFR_RNDN);
      mpfr_sub(k.get(), tmp.get(), k.get(), MPFR_RNDN);
    } else {
      // (sqrt(1 - rho^2) + rho (pi - acos(rho))) / (2 pi)
      mpfr_sqr(tmp.get(), r.get(), MPFR_RNDN);
      mpfr_ui_sub(tmp.get(), 1, tmp.get(), MPFR_RNDN);
      mpfr_sqrt(tmp.get(), tmp.get(), MPFR_RNDN);
      mpfr_sub(k.get(), pi.get(), acos_r.get(), MPFR_RNDN);
      mpfr_mul(k.get(), k.get(), r.get(), MPFR_RNDN);
      mpfr_add(k.get(), k.get(), tmp.get(), MPFR_RNDN);
      mpfr_div(k.get(), k.get(), pi.get(), MPFR_RNDN);
      mpfr_div_2ui(k.get(), k.get(), 1, MPFR_RNDN);
    }
    mpfr_mul_z(term.get(), k.get(), w[t].get(), MPFR_RNDN);
    mpfr_add(out, out, term.get(), MPFR_RNDN);
  }
  if (pow2 >= 0) {
    mpfr_div_2ui(out, out, static_cast<unsigned long>(pow2), MPFR_RNDN);
  } else {
    mpfr_mul_2ui(out, out, static_cast<unsigned long>(-pow2), MPFR_RNDN);
  }
}

LogValue to_log(mpfr_srcptr x) {
  if (mpfr_zero_p(x)) return {0, -std::numeric_limits<double>::infinity()};
  long e = 0;
  const double m = mpfr_get_d_2exp(&e, x, MPFR_RNDN);
  return {m > 0 ? 1 : -1, std::log(std::fabs(m)) + static_cast<double>(e) * std::log(2.0)};
}

}  // namespace

std::vector<BigInt> signed_binomial_weights(int d, int s) {
  if (d < 0 || s < 0 || s > d) throw std::invalid_argument("signed_binomial_weights: need 0 <= s <= d");
  const int r = d - s;
  std::vector<BigInt> p(d + 1);
  p[0] = 1;
  if (d >= 1) p[1] = r - s;
  // (1 - z^2) P' = ((r - s) - d z) P gives the three-term recurrence.
  for (int t = 1; t < d; ++t) {
    BigInt next = BigInt(r - s) * p[t] + BigInt(t - 1 - d) * p[t - 1];
    p[t + 1] = next / (t + 1);
  }
  return p;
}

LogValue precise_kernel_sum(const std::vector<BigInt>& w, int pow2, const AffineRho& rho,
                            GaussKernel kernel) {
  std::vector<Mpz> wz;
  wz.reserve(w.size());
  std::size_t max_bits = 1;
  bool any = false;
  for (const auto& x : w) {
    wz.emplace_back(x);
    if (x != 0) {
      any = true;
      max_bits = std::max<std::size_t>(max_bits, msb(x < 0 ? BigInt(-x) : x) + 1);
    }
  }
  if (!any) return {0, -std::numeric_limits<double>::infinity()};

  mpfr_prec_t prec = static_cast<mpfr_prec_t>(128 + max_bits + 2 * rho.d);
  const mpfr_prec_t cap = static_cast<mpfr_prec_t>(1) << 16;
  // log2 of the rounding-error bound of an evaluation at precision p:
  // (d + 1) terms of size <= 2^max_bits, each with a few ulps of error.
  const double noise_log2 = static_cast<double>(max_bits) + std::log2(static_cast<double>(w.size())) + 8.0 -
                            static_cast<double>(pow2);
  auto below_noise = [&](mpfr_srcptr x, mpfr_prec_t p) {
    return mpfr_zero_p(x) || static_cast<double>(mpfr_get_exp(x)) < noise_log2 - static_cast<double>(p);
  };
  int zero_hits = 0;
  for (;;) {
    const mpfr_prec_t hi = prec + 96;
    Mpfr lo_val(prec), hi_val(hi), diff(hi);
    evaluate(lo_val.get(), wz, pow2, rho, kernel, prec);
    evaluate(hi_val.get(), wz, pow2, rho, kernel, hi);
    if (mpfr_zero_p(hi_val.get())) return to_log(hi_val.get());
    // Exact cancellation shows up as a result that stays at the noise floor
    // while the precision doubles.
    if (below_noise(lo_val.get(), prec) && below_noise(hi_val.get(), hi)) {
      if (++zero_hits >= 2) return {0, -std::numeric_limits<double>::infinity()};
    } else {
      mpfr_sub(diff.get(), hi_val.get(), lo_val.get(), MPFR_RNDN);
      mpfr_div(diff.get(), diff.get(), hi_val.get(), MPFR_RNDN);
      if (std::fabs(mpfr_get_d(diff.get(), MPFR_RNDN)) < 1e-15) return to_log(hi_val.get());
    }
    if (prec >= cap) return to_log(hi_val.get());
    prec *= 2;
  }
}

}  // namespace parity::detail
