#pragma once

#include <functional>
#include <vector>

#include "parity/exactcomb.hpp"
#include "parity/gaussiankit.hpp"

namespace parity::detail {

// Exact integer coefficients of (1 - z)^s (1 + z)^(d - s), t = 0..d.
std::vector<BigInt> signed_binomial_weights(int d, int s);

// rho_t = (alpha (d - 2t) / d + beta + sigma_b^2) / (1 + sigma_b^2), formed at
// working precision from the exact double inputs.
struct AffineRho {
  int d = 1;
  double alpha = 1.0;
  double beta = 0.0;
  double sigma_b = 0.0;
};

// 2^-pow2 sum_t w_t K(rho_t) with K the step (orthant) or relu kernel.
// Working precision grows until two evaluations agree to ~1e-15 relative, or
// both stay under the rounding-error floor (exact cancellation, returned as 0).
LogValue precise_kernel_sum(const std::vector<BigInt>& w, int pow2, const AffineRho& rho,
                            GaussKernel kernel);

}  // namespace parity::detail
