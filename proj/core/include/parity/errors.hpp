#pragma once

#include <stdexcept>

namespace parity {

// Thrown when a request would exceed a hard computational limit, such as
// enumerating {-1,1}^d for d > 22.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxEnumerateDim = 22;

}  // namespace parity
