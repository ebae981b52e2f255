#include "parity/alignment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "parity/errors.hpp"
#include "parity/gaussiankit.hpp"
#include "precise_sum.hpp"

namespace parity {
namespace {

enum Tag : std::uint64_t { kTheta = 11, kInnerA = 12, kInnerB = 13, kJunk = 14, kJunkNoise = 15 };

void check_query(const GaussianGalQuery& q) {
  if (q.d < 1 || q.d > 2000) throw std::invalid_argument("gaussian GAL: need 1 <= d <= 2000");
  if (q.a < 0 || 2 * q.a > q.d) throw std::invalid_argument("gaussian GAL: need 0 <= a <= d/2");
  if (q.n < 1) throw std::invalid_argument("gaussian GAL: width n must be >= 1");
  if (!(q.sigma_b >= 0.0)) throw std::invalid_argument("gaussian GAL: sigma_b must be >= 0");
}

// Compensated summation keeps the alternating sums reproducible and tight.
class Neumaier {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::fabs(sum_) >= std::fabs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

LogValue gal_gaussian_coord_log(const GaussianGalQuery& q, const GalCoord& coord) {
  check_query(q);
  const int head = q.d - q.a;
  int s = head;
  if (coord.kind == GalCoord::Kind::hidden) {
    if (coord.j < 1 || coord.j > q.d) {
      throw std::out_of_range("gaussian GAL: hidden coordinate j=" + std::to_string(coord.j) +
                              " outside [1, " + std::to_string(q.d) + "]");
    }
    s = coord.j <= head ? head - 1 : head + 1;
  }
  const auto w = detail::signed_binomial_weights(q.d, s);
  const GaussKernel kernel = coord.kind == GalCoord::Kind::output ? GaussKernel::relu : GaussKernel::step;
  LogValue v = detail::precise_kernel_sum(w, q.d, {q.d, 1.0, 0.0, q.sigma_b}, kernel);
  if (v.sign == 0) return v;
  if (coord.kind == GalCoord::Kind::output) {
    v.log_abs += std::log1p(q.sigma_b * q.sigma_b);
  } else {
    v.log_abs -= std::log(static_cast<double>(q.n));
  }
  return v;
}

double gal_gaussian_coord(const GaussianGalQuery& q, const GalCoord& coord) {
  return gal_gaussian_coord_log(q, coord).value();
}

double gal_gaussian_total(const GaussianGalQuery& q) {
  check_query(q);
  const int head = q.d - q.a;
  double per_neuron = head * gal_gaussian_coord(q, GalCoord::hidden(1));
  if (q.a > 0) per_neuron += q.a * gal_gaussian_coord(q, GalCoord::hidden(q.d));
  per_neuron += gal_gaussian_coord(q, GalCoord::bias());
  per_neuron += gal_gaussian_coord(q, GalCoord::output());
  return q.n * per_neuron;
}

double gal_perturbed_exact(const PerturbedGalQuery& q, GalLayer layer) {
  if (q.d > 200) throw ResourceLimitError("perturbed GAL: exact evaluation limited to d <= 200");
  if (q.d < 2) throw std::invalid_argument("perturbed GAL: need d >= 2");
  if (!(q.mu >= 0.0)) throw std::invalid_argument("perturbed GAL: mu must be >= 0");
  const bool hidden = layer == GalLayer::hidden;
  // Counts of (+,+), (+,-), (-,+), (-,-) pairs over the first m coordinates.
  const int m = hidden ? q.d - 1 : q.d;
  const long double log4 = std::log(4.0L);
  const long double lgm = std::lgamma(static_cast<long double>(m) + 1.0L);
  auto lf = [](int k) { return std::lgamma(static_cast<long double>(k) + 1.0L); };
  Neumaier sum;
  for (int n1 = 0; n1 <= m; ++n1) {
    for (int n2 = 0; n1 + n2 <= m; ++n2) {
      for (int n3 = 0; n1 + n2 + n3 <= m; ++n3) {
        const int n4 = m - n1 - n2 - n3;
        const double w = static_cast<double>(
            std::exp(lgm - lf(n1) - lf(n2) - lf(n3) - lf(n4) - m * log4));
        if (w == 0.0) continue;
        const double sign = ((n2 + n3) % 2 == 0) ? 1.0 : -1.0;
        const int s0 = n1 + n2 - n3 - n4;
        const int t0 = n1 - n2 + n3 - n4;
        const int p0 = n1 + n4 - n2 - n3;
        if (!hidden) {
          const double rho = static_cast<double>(p0) / q.d;
          sum.add(sign * w * relu_cross_moment({q.mu * s0, q.mu * t0, rho}));
          continue;
        }
        // The last coordinate is outside the product; average its four patterns.
        for (int e : {1, -1}) {
          for (int f : {1, -1}) {
            const double rho = static_cast<double>(p0 + e * f) / q.d;
            sum.add(0.25 * sign * w * lambda_cdf({q.mu * (s0 + e), q.mu * (t0 + f), rho}));
          }
        }
      }
    }
  }
  return sum.value();
}

NetParams junk_flow_run(NetParams theta0, const LossKind& loss, double gamma, double tau,
                        std::int64_t T, std::size_t batch, std::uint64_t seed) {
  if (T < 0) throw std::invalid_argument("junk flow: T must be >= 0");
  if (tau < 0.0) throw std::invalid_argument("junk flow: tau must be >= 0");
  const bool sample_grad = loss.kind != LossKind::Kind::correlation;
  if (sample_grad && batch < 1) throw std::invalid_argument("junk flow: batch must be >= 1");
  const int d = static_cast<int>(theta0.input_dim());
  NetParams grad = theta0.zeros_like();
  for (std::int64_t t = 0; t < T; ++t) {
    if (sample_grad) {
      Rng rng = make_stream(seed, {kJunk, static_cast<std::uint64_t>(t)});
      const Mat X = random_inputs(d, batch, rng);
      Vec y(static_cast<Eigen::Index>(batch));
      for (auto& v : y) v = (rng() >> 63) ? 1.0 : -1.0;
      batch_gradient(theta0, X, y, loss, grad);
    }
    Rng noise_rng = make_stream(seed, {kJunkNoise, static_cast<std::uint64_t>(t)});
    std::normal_distribution<double> noise(0.0, tau > 0.0 ? tau : 1.0);
    for (std::size_t l = 0; l < theta0.layers.size(); ++l) {
      Layer& layer = theta0.layers[l];
      for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
          const double g = sample_grad ? grad.layers[l].W(r, c) : 0.0;
          layer.W(r, c) -= gamma * (g + (tau > 0.0 ? noise(noise_rng) : 0.0));
        }
      }
      if (!layer.has_bias) continue;
      for (Eigen::Index r = 0; r < layer.b.size(); ++r) {
        const double g = sample_grad ? grad.layers[l].b(r) : 0.0;
        layer.b(r) -= gamma * (g + (tau > 0.0 ? noise(noise_rng) : 0.0));
      }
    }
  }
  return theta0;
}

GalResult gal_mc(const NetworkSpec& spec, const InitSpec& init, const LossKind& loss,
                 const TargetSpec& target, std::size_t n_theta, std::size_t n_inner, std::uint64_t seed,
                 const GalMcOptions& options) {
  if (n_theta < 2) throw std::invalid_argument("gal_mc: need at least 2 theta samples");
  if (n_inner < 2) throw std::invalid_argument("gal_mc: need at least 2 inner samples");
  if (target.min_dim() > spec.input_dim) throw std::invalid_argument("gal_mc: target needs more coordinates");
  const std::size_t half = n_inner / 2;
  const int d = spec.input_dim;

  // Gamma_f - Gamma_r at one input: (L'(yhat, f) - (L'(yhat, 1) + L'(yhat, -1)) / 2) grad NN.
  auto inner_mean = [&](const NetParams& theta, Rng& rng, NetParams& grad) {
    const Mat X = random_inputs(d, half, rng);
    const Vec f = target.evaluate(X);
    const double inv = 1.0 / static_cast<double>(half);
    weighted_gradient(
        theta, X,
        [&](Eigen::Index c, double yhat) {
          const double random_label = 0.5 * (loss.derivative(yhat, 1.0) + loss.derivative(yhat, -1.0));
          return (loss.derivative(yhat, f(c)) - random_label) * inv;
        },
        grad);
    return grad.flatten();
  };

  std::vector<double> z(n_theta);
  NetParams grad;
  for (std::size_t i = 0; i < n_theta; ++i) {
    Rng theta_rng = make_stream(seed, {kTheta, i});
    NetParams theta = make_net(spec, init, theta_rng);
    if (options.junk.steps > 0) {
      theta = junk_flow_run(std::move(theta), loss, options.junk.gamma, options.junk.tau,
                            options.junk.steps, options.junk.batch, seed ^ (0x9e3779b97f4a7c15ull * (i + 1)));
    }
    Rng rng_a = make_stream(seed, {kInnerA, i});
    Rng rng_b = make_stream(seed, {kInnerB, i});
    const Vec ga = inner_mean(theta, rng_a, grad);
    const Vec gb = inner_mean(theta, rng_b, grad);
    if (options.coordinate) {
      if (*options.coordinate >= static_cast<std::size_t>(ga.size())) {
        throw std::out_of_range("gal_mc: coordinate index out of range");
      }
      const auto p = static_cast<Eigen::Index>(*options.coordinate);
      z[i] = ga(p) * gb(p);
    } else {
      z[i] = ga.dot(gb);
    }
  }

  // Jackknife over theta samples.
  const double n = static_cast<double>(n_theta);
  double total = 0.0;
  for (double v : z) total += v;
  const double mean = total / n;
  double ss = 0.0;
  for (double v : z) {
    const double loo = (total - v) / (n - 1.0);
    ss += (loo - mean) * (loo - mean);
  }
  GalResult res;
  res.method = GalResult::Method::monte_carlo;
  res.estimate = mean;
  res.value = std::max(mean, 0.0);
  res.std_err = std::sqrt((n - 1.0) / n * ss);
  return res;
}

}  // namespace parity
