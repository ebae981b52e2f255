#pragma once

// Forward and backward passes shared by the double-precision NetParams and the
// single-precision copy used by the f32 training loop.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "parity/activation.hpp"
#include "parity/nets.hpp"

namespace parity::detail {

template <class S>
struct LayerT {
  Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> W;
  Eigen::Matrix<S, Eigen::Dynamic, 1> b;
  bool has_bias = true;
};

template <class M>
void apply_act(const Activation& act, const M& Z, M& A) {
  using S = typename M::Scalar;
  if (act.kind == Activation::Kind::relu) {
    A = Z.cwiseMax(S(0));
  } else {
    A = Z.unaryExpr([act](S z) { return static_cast<S>(act(static_cast<double>(z))); });
  }
}

template <class M>
void multiply_by_derivative(const Activation& act, const M& Z, M& G) {
  using S = typename M::Scalar;
  if (act.kind == Activation::Kind::relu) {
    G = (Z.array() >= S(0)).select(G, S(0));
  } else {
    G = G.cwiseProduct(
        Z.unaryExpr([act](S z) { return static_cast<S>(act.derivative(static_cast<double>(z))); }));
  }
}

// Z[l] is the pre-activation of layer l, A[l] its input (A[0] = X).
template <class M>
struct Tape {
  std::vector<M> Z;
  std::vector<M> A;
};

template <class L, class M>
void run_forward(const std::vector<L>& layers, const Activation& act, const M& X, Tape<M>& tape) {
  const std::size_t n = layers.size();
  tape.Z.resize(n);
  tape.A.resize(n);
  tape.A[0] = X;
  for (std::size_t l = 0; l < n; ++l) {
    tape.Z[l].noalias() = layers[l].W * tape.A[l];
    if (layers[l].has_bias) tape.Z[l].colwise() += layers[l].b;
    if (l + 1 < n) apply_act(act, tape.Z[l], tape.A[l + 1]);
  }
}

// g holds dL/dyhat per column, already averaged.
template <class L, class M>
void run_backward(const std::vector<L>& layers, const Activation& act,
                  const std::optional<Activation>& output_act, const Tape<M>& tape, M g,
                  std::vector<L>& grad, bool output_only) {
  const std::size_t n = layers.size();
  if (output_act) multiply_by_derivative(*output_act, tape.Z.back(), g);
  for (std::size_t l = n; l-- > 0;) {
    grad[l].W.noalias() = g * tape.A[l].transpose();
    if (layers[l].has_bias) grad[l].b = g.rowwise().sum();
    if (output_only || l == 0) break;
    M prev = layers[l].W.transpose() * g;
    multiply_by_derivative(act, tape.Z[l - 1], prev);
    g = std::move(prev);
  }
}

template <class M>
Eigen::Matrix<typename M::Scalar, Eigen::Dynamic, 1> output_values(const std::optional<Activation>& output_act,
                                                                  const Tape<M>& tape) {
  using S = typename M::Scalar;
  Eigen::Matrix<S, Eigen::Dynamic, 1> out = tape.Z.back().row(0).transpose();
  if (output_act) {
    const Activation act = *output_act;
    out = out.unaryExpr([act](S z) { return static_cast<S>(act(static_cast<double>(z))); });
  }
  return out;
}

template <class S>
std::vector<LayerT<S>> cast_layers(const std::vector<Layer>& layers) {
  std::vector<LayerT<S>> out(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    out[l].W = layers[l].W.cast<S>();
    out[l].b = layers[l].b.cast<S>();
    out[l].has_bias = layers[l].has_bias;
  }
  return out;
}

template <class S>
void copy_back(const std::vector<LayerT<S>>& from, std::vector<Layer>& to) {
  for (std::size_t l = 0; l < from.size(); ++l) {
    to[l].W = from[l].W.template cast<double>();
    to[l].b = from[l].b.template cast<double>();
  }
}

}  // namespace parity::detail
