#pragma once

#include <string>

namespace parity {

// Pointwise activation. The derivative uses the closed indicator at 0, so
// relu'(0) = 1; clipped relu has slope 1 on [0, clip).
struct Activation {
  enum class Kind { relu, clipped_relu, threshold };

  Kind kind = Kind::relu;
  double clip = 0.0;

  static Activation relu() { return {}; }
  static Activation clipped(double clip);
  static Activation threshold() { return {Kind::threshold, 0.0}; }

  double operator()(double x) const;
  double derivative(double x) const;

  bool piecewise_linear() const { return kind != Kind::threshold; }

  std::string name() const;
  static Activation parse(const std::string& text);
};

}  // namespace parity
