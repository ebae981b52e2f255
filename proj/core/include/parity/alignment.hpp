#pragma once

#include <cstdint>
#include <optional>

#include "parity/exactcomb.hpp"
#include "parity/nets.hpp"

namespace parity {

// Two-layer relu net with w ~ N(0, I/d), b ~ N(0, sigma_b^2), v ~ N(0, 1/n)
// and target prod_{i <= d-a} x_i.
struct GaussianGalQuery {
  int d = 2;
  int a = 0;
  double sigma_b = 0.0;
  int n = 1;
};

struct GalCoord {
  enum class Kind { hidden, bias, output };
  Kind kind = Kind::hidden;
  int j = 1;  // 1-based input coordinate for hidden weights

  static GalCoord hidden(int j) { return {Kind::hidden, j}; }
  static GalCoord bias() { return {Kind::bias, 0}; }
  static GalCoord output() { return {Kind::output, 0}; }
};

// Exact squared expected gradient of one coordinate under correlation loss.
double gal_gaussian_coord(const GaussianGalQuery& q, const GalCoord& coord);
LogValue gal_gaussian_coord_log(const GaussianGalQuery& q, const GalCoord& coord);
// Sum over all n d + 2 n coordinates.
double gal_gaussian_total(const GaussianGalQuery& q);

// No-bias net with w = g + mu r, g ~ N(0, I/d), r Rademacher.
struct PerturbedGalQuery {
  int d = 2;
  double mu = 0.0;
};

enum class GalLayer { hidden, output };

// hidden: E[(E_x prod_{i<d} x_i 1((g + mu r).x >= 0))^2]
// output: E[(E_x prod_{i<=d} x_i relu((g + mu r).x))^2]
double gal_perturbed_exact(const PerturbedGalQuery& q, GalLayer layer);

struct GalResult {
  enum class Method { exact, monte_carlo };
  double value = 0.0;     // max(estimate, 0)
  double estimate = 0.0;  // unbiased, may dip below 0 when the true value is tiny
  Method method = Method::exact;
  double std_err = 0.0;
};

struct JunkFlowSpec {
  std::int64_t steps = 0;
  double gamma = 1.0;
  double tau = 0.0;
  std::size_t batch = 64;
};

struct GalMcOptions {
  std::optional<std::size_t> coordinate;  // flattened index; all coordinates when empty
  JunkFlowSpec junk;                      // random-label steps applied to each theta first
};

// Monte-Carlo estimate of E_theta ||Gamma_f(theta) - Gamma_r(theta)||^2. Each
// theta gets two independent inner batches of n_inner / 2 inputs, and the
// per-coordinate means of the two batches are multiplied.
GalResult gal_mc(const NetworkSpec& net, const InitSpec& init, const LossKind& loss,
                 const TargetSpec& target, std::size_t n_theta, std::size_t n_inner, std::uint64_t seed,
                 const GalMcOptions& options = {});

// psi <- psi - gamma (grad on random labels + N(0, tau^2)); the random-label
// gradient of the correlation loss is exactly 0 and is not sampled.
NetParams junk_flow_run(NetParams theta0, const LossKind& loss, double gamma, double tau,
                        std::int64_t T, std::size_t batch, std::uint64_t seed);

}  // namespace parity
