#pragma once

#include "parity/exactcomb.hpp"

namespace parity {

double std_pdf(double x);
double std_cdf(double x);

// Probabilist's Hermite polynomial He_k(x), k <= 200.
double hermite(int k, double x);

// P(G1 >= 0, G2 >= 0) for unit Gaussians with correlation rho.
double orthant_centered(double rho);

struct BivariateQuery {
  double a = 0.0;
  double b = 0.0;
  double rho = 0.0;
};

// P(g <= a, g' <= b) for unit-variance rho-correlated centered Gaussians.
double lambda_cdf(const BivariateQuery& q);
// E[relu(a + Z) relu(b + Z')] for the same pair.
double relu_cross_moment(const BivariateQuery& q);

// Series paths without the quadrature switch; valid for |rho| < 1 and used
// to cross-check the two evaluation routes.
double lambda_cdf_series(const BivariateQuery& q);
double relu_cross_moment_series(const BivariateQuery& q);
double lambda_cdf_quadrature(const BivariateQuery& q);
double relu_cross_moment_quadrature(const BivariateQuery& q);

// relu_cross_moment(0, 0, rho) in closed form.
double relu_kernel00(double rho);

struct AlternatingGaussianSpec {
  int d = 1;
  double alpha = 0.0;
  double beta = 0.0;
};

enum class GaussKernel { step, relu };

// sum_k 2^-d C(d,k) (-1)^k K(rho_k), rho_k = (1 - 2k/d) alpha + beta, with
// K = orthant_centered (step) or relu_cross_moment(0, 0, .) (relu).
// Evaluated with enough working precision that the cancellation is exact to
// double accuracy; the log form stays usable where the value underflows.
double alternating_expectation(const AlternatingGaussianSpec& spec, GaussKernel kernel);
LogValue alternating_expectation_log(const AlternatingGaussianSpec& spec, GaussKernel kernel);

}  // namespace parity
