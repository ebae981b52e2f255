#include "parity/gaussiankit.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "precise_sum.hpp"

namespace parity {
namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kSeriesTol = 1e-14;
constexpr double kSeriesSwitch = 0.9;
constexpr int kMaxSeriesTerms = 20000;

// Normalized Hermite functions p_k(x) = phi(x) He_k(x) / sqrt(k!), which obey
// |p_k| < 1 and never need a factorial.
class HermiteFunction {
 public:
  explicit HermiteFunction(double x) : x_(x), prev_(0.0), cur_(std_pdf(x)) {}
  double value() const { return cur_; }
  void advance() {
    const double next = (x_ * cur_ - std::sqrt(static_cast<double>(k_)) * prev_) /
                        std::sqrt(static_cast<double>(k_ + 1));
    prev_ = cur_;
    cur_ = next;
    ++k_;
  }

 private:
  double x_;
  double prev_;
  double cur_;
  int k_ = 0;
};

double check_rho(double rho) {
  if (!(std::fabs(rho) <= 1.0 + 1e-12)) throw std::invalid_argument("correlation outside [-1, 1]");
  return std::clamp(rho, -1.0, 1.0);
}

template <class F>
double integrate(F f, std::vector<double> points) {
  std::sort(points.begin(), points.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i + 1] <= points[i]) continue;
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, points[i], points[i + 1], 15, 1e-13, &err);
  }
  return total;
}

double relu_expect_shifted(double m, double s) {
  if (s <= 0.0) return m > 0.0 ? m : 0.0;
  return m * std_cdf(m / s) + s * std_pdf(m / s);
}

}  // namespace

double std_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double hermite(int k, double x) {
  if (k < 0 || k > 200) throw std::invalid_argument("hermite: need 0 <= k <= 200");
  double prev = 1.0;
  if (k == 0) return prev;
  double cur = x;
  for (int j = 1; j < k; ++j) {
    const double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double orthant_centered(double rho) {
  rho = check_rho(rho);
  return 0.5 - std::acos(rho) / (2.0 * std::numbers::pi);
}

double relu_kernel00(double rho) {
  rho = check_rho(rho);
  return (std::sqrt(1.0 - rho * rho) + rho * (std::numbers::pi - std::acos(rho))) /
         (2.0 * std::numbers::pi);
}

double lambda_cdf_series(const BivariateQuery& q) {
  if (!(std::fabs(q.rho) < 1.0)) throw std::domain_error("lambda_cdf_series needs |rho| < 1");
  const double r = std::fabs(q.rho);
  HermiteFunction ha(q.a), hb(q.b);
  double sum = 0.0;
  double rho_pow = q.rho;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    const double term = ha.value() * hb.value() * rho_pow / (k + 1);
    sum += term;
    const double tail = std::pow(r, k + 2) / ((k + 2) * (1.0 - r));
    if (std::fabs(term) < kSeriesTol && tail < kSeriesTol) break;
    ha.advance();
    hb.advance();
    rho_pow *= q.rho;
  }
  return std_cdf(q.a) * std_cdf(q.b) + sum;
}

double relu_cross_moment_series(const BivariateQuery& q) {
  if (!(std::fabs(q.rho) < 1.0)) throw std::domain_error("relu_cross_moment_series needs |rho| < 1");
  const double r = std::fabs(q.rho);
  HermiteFunction ha(q.a), hb(q.b);
  double sum = 0.0;
  double rho_pow = q.rho * q.rho;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    const double term = ha.value() * hb.value() * rho_pow / ((k + 1.0) * (k + 2.0));
    sum += term;
    const double tail = std::pow(r, k + 3) / ((k + 2.0) * (k + 3.0) * (1.0 - r));
    if (std::fabs(term) < kSeriesTol && tail < kSeriesTol) break;
    ha.advance();
    hb.advance();
    rho_pow *= q.rho;
  }
  auto big_r = [](double x) { return x * std_cdf(x) + std_pdf(x); };
  return big_r(q.a) * big_r(q.b) + std_cdf(q.a) * std_cdf(q.b) * q.rho + sum;
}

double lambda_cdf_quadrature(const BivariateQuery& q) {
  const double rho = check_rho(q.rho);
  if (rho == 1.0) return std_cdf(std::min(q.a, q.b));
  if (rho == -1.0) return std::max(0.0, std_cdf(q.a) + std_cdf(q.b) - 1.0);
  const double s = std::sqrt(1.0 - rho * rho);
  const double lo = std::min(-12.0, q.a - 8.0);
  const double hi = std::min(q.a, 12.0);
  std::vector<double> pts{lo, hi};
  if (rho != 0.0) {
    const double knee = q.b / rho;
    if (knee > lo && knee < hi) pts.push_back(knee);
  }
  return integrate([&](double t) { return std_pdf(t) * std_cdf((q.b - rho * t) / s); }, pts);
}

double relu_cross_moment_quadrature(const BivariateQuery& q) {
  const double rho = check_rho(q.rho);
  const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double lo = std::max(-q.a, -12.0);
  const double hi = std::max(12.0, lo + 10.0);
  std::vector<double> pts{lo, hi};
  if (rho != 0.0) {
    const double knee = -q.b / rho;
    if (knee > lo && knee < hi) pts.push_back(knee);
  }
  return integrate(
      [&](double z) { return std_pdf(z) * (q.a + z) * relu_expect_shifted(q.b + rho * z, s); }, pts);
}

double lambda_cdf(const BivariateQuery& q) {
  const double rho = check_rho(q.rho);
  if (std::fabs(rho) <= kSeriesSwitch) return lambda_cdf_series({q.a, q.b, rho});
  return lambda_cdf_quadrature({q.a, q.b, rho});
}

double relu_cross_moment(const BivariateQuery& q) {
  const double rho = check_rho(q.rho);
  if (std::fabs(rho) <= kSeriesSwitch) return relu_cross_moment_series({q.a, q.b, rho});
  return relu_cross_moment_quadrature({q.a, q.b, rho});
}

LogValue alternating_expectation_log(const AlternatingGaussianSpec& spec, GaussKernel kernel) {
  if (spec.d < 1 || spec.d > 5000) throw std::invalid_argument("alternating_expectation: need 1 <= d <= 5000");
  if (spec.alpha < 0.0 || spec.alpha + std::fabs(spec.beta) > 1.0 + 1e-12) {
    throw std::invalid_argument("alternating_expectation: need alpha >= 0 and alpha + |beta| <= 1");
  }
  // A constant kernel argument cancels exactly against sum_k (-1)^k C(d,k) = 0.
  if (spec.alpha == 0.0) return {0, -std::numeric_limits<double>::infinity()};
  const auto w = detail::signed_binomial_weights(spec.d, spec.d);
  return detail::precise_kernel_sum(w, spec.d, {spec.d, spec.alpha, spec.beta, 0.0}, kernel);
}

double alternating_expectation(const AlternatingGaussianSpec& spec, GaussKernel kernel) {
  return alternating_expectation_log(spec, kernel).value();
}

}  // namespace parity
