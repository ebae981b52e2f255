#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "parity/activation.hpp"
#include "parity/rng.hpp"

namespace parity {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct InitSpec {
  enum class Family {
    gaussian,
    rademacher,
    perturbed_rademacher,
    uniform_perturbed,
    sparsified_rademacher,
    discrete_symmetric
  };

  Family family = Family::rademacher;
  double sigma = 0.0;
  double s = 0.0;

  static InitSpec gaussian() { return {Family::gaussian}; }
  static InitSpec rademacher() { return {Family::rademacher}; }
  static InitSpec perturbed(double sigma) { return {Family::perturbed_rademacher, sigma}; }
  static InitSpec uniform_perturbed(double sigma) { return {Family::uniform_perturbed, sigma}; }
  static InitSpec sparsified(double s) { return {Family::sparsified_rademacher, 0.0, s}; }
  static InitSpec discrete() { return {Family::discrete_symmetric}; }

  void validate() const;
  // One entry for a parameter whose layer has fan-in `dim`.
  double sample(Rng& rng, double dim) const;
  std::string name() const;
  // "gaussian", "rademacher", "perturbed:<sigma>", "uniform:<sigma>",
  // "sparsified:<s>", "discrete".
  static InitSpec parse(const std::string& text);
};

Mat sample_init(const InitSpec& spec, Eigen::Index rows, Eigen::Index cols, Rng& rng);
Mat sample_init(const InitSpec& spec, Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

struct Layer {
  Mat W;
  Vec b;
  bool has_bias = true;
};

// Fully connected net x -> W_1 x + b_1 -> act -> ... -> W_L (.) + b_L, with a
// scalar output. An output activation turns it into a single-neuron model.
struct NetParams {
  std::vector<Layer> layers;
  Activation act;
  std::optional<Activation> output_act;

  Eigen::Index input_dim() const { return layers.front().W.cols(); }
  std::size_t param_count() const;
  // Layer order; W row-major, then b when present.
  Vec flatten() const;
  void unflatten(const Vec& theta);
  NetParams zeros_like() const;
  // Index of the layer owning flattened coordinate p.
  std::size_t layer_of(std::size_t p) const;
};

struct NetworkSpec {
  int input_dim = 1;
  std::vector<int> hidden;
  Activation act;
  bool bias = true;
  std::optional<Activation> output_act;
};

NetParams make_net(const NetworkSpec& spec, const InitSpec& init, Rng& rng);
NetParams make_net(const NetworkSpec& spec, const InitSpec& init, std::uint64_t seed);

struct LossKind {
  enum class Kind { correlation, hinge, squared, l1 };

  Kind kind = Kind::correlation;
  double beta = 1.0;

  static LossKind correlation() { return {}; }
  static LossKind hinge(double beta) { return {Kind::hinge, beta}; }
  static LossKind squared() { return {Kind::squared}; }
  static LossKind l1() { return {Kind::l1}; }

  double value(double yhat, double y) const;
  // Derivative in yhat; 0 at the hinge kink and at yhat == y for l1.
  double derivative(double yhat, double y) const;
  std::string name() const;
  static LossKind parse(const std::string& text);
};

struct TargetSpec {
  enum class Kind { parity, leap_poly };

  Kind kind = Kind::parity;
  std::vector<int> support;  // 0-based coordinates for parity

  static TargetSpec parity(std::vector<int> support);
  static TargetSpec full_parity(int d);
  // Parity on the first d - a coordinates.
  static TargetSpec co_degree(int d, int a);
  // 1/8 x1x2x3 + 3/8 x1x2x4 + 1/4 x1x3x4 + 1/4 x2x3x4
  static TargetSpec leap_poly() { return {Kind::leap_poly, {}}; }

  double operator()(const double* x) const;
  Vec evaluate(const Mat& X) const;
  bool boolean_valued() const { return kind == Kind::parity; }
  int min_dim() const;
};

double forward(const NetParams& net, const Vec& x);
Vec forward_batch(const NetParams& net, const Mat& X);

// d NN / d theta, flattened.
Vec output_grad(const NetParams& net, const Vec& x);
Vec loss_grad(const NetParams& net, const Vec& x, double y, const LossKind& loss);

// Mean loss gradient over the columns of X, written into `grad` (same shape
// as `net`). With output_only only the last layer is filled. Returns the mean loss.
double batch_gradient(const NetParams& net, const Mat& X, const Vec& y, const LossKind& loss,
                      NetParams& grad, bool output_only = false);

// Fills `grad` with sum_c weight(c, yhat_c) dNN(x_c)/dtheta and returns the
// outputs yhat. batch_gradient is the special case weight = L'(yhat_c, y_c) / B.
Vec weighted_gradient(const NetParams& net, const Mat& X,
                      const std::function<double(Eigen::Index, double)>& weight, NetParams& grad,
                      bool output_only = false);

struct Batch {
  Mat X;  // d x B, entries +-1
  Vec y;
};

Mat random_inputs(int d, std::size_t count, Rng& rng);
Batch parity_batch(int d, const TargetSpec& target, std::size_t count, Rng& rng);
Batch parity_batch(int d, const std::vector<int>& support, std::size_t count, std::uint64_t seed);
// Inputs with index in [first, first + count) of the 2^d cube; bit i set means x_i = -1.
Mat cube_slice(int d, std::uint64_t first, std::size_t count);

struct EvalSpec {
  bool enumerate = false;
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
};

struct AccuracyReport {
  double accuracy = 0.0;
  std::size_t total = 0;
  std::size_t zero_outputs = 0;  // counted as errors
  bool degenerate = false;       // every output was 0; compare with the 0.5 baseline
};

AccuracyReport eval_accuracy(const NetParams& net, const TargetSpec& target, const EvalSpec& eval);
double eval_loss(const NetParams& net, const TargetSpec& target, const LossKind& loss,
                 const EvalSpec& eval);

struct TrainConfig {
  static constexpr std::size_t kFullBatch = 0;
  enum class Layers { all, output_only };
  // f32 runs the minibatch steps on a float copy of the weights. Losses and
  // evaluations still use double.
  enum class Precision { f64, f32 };

  double gamma = 0.01;
  double tau = 0.0;
  std::size_t batch = 64;  // kFullBatch means the population mean over {-1,1}^d
  std::int64_t steps = 1000;
  std::uint64_t seed = 0;
  Layers train_layers = Layers::all;
  std::size_t offline_samples = 0;  // 0 means fresh online batches
  std::int64_t eval_every = 0;      // 0 evaluates only at the start and the end
  EvalSpec eval;
  double stop_loss = 1e-2;  // offline stopping threshold on the training loss
  Precision precision = Precision::f64;

  void validate(int d) const;
};

struct TracePoint {
  std::int64_t step = 0;
  std::int64_t samples = 0;
  double train_loss = 0.0;
  double test_metric = 0.0;
};

struct MetricsTrace {
  std::string test_metric;  // test_accuracy for parities, test_loss otherwise
  std::vector<TracePoint> points;
};

std::pair<NetParams, MetricsTrace> noisy_sgd(NetParams net, const TargetSpec& target,
                                             const TrainConfig& cfg, const LossKind& loss);

// parity: 0 for even d, -1 for odd d. almost_full: -2 for even d, -1 for odd d.
// coin: a + 2 or a + 2.1 with probability 1/2 each.
struct BiasScheme {
  enum class Kind { parity, almost_full, coin, fixed };
  Kind kind = Kind::parity;
  double value = 0.0;

  static BiasScheme parity() { return {}; }
  static BiasScheme almost_full() { return {Kind::almost_full}; }
  static BiasScheme coin() { return {Kind::coin}; }
  static BiasScheme fixed(double b) { return {Kind::fixed, b}; }
  static BiasScheme parse(const std::string& text);
};

// Two-layer net with unnormalized +-1 hidden weights (plus N(0, perturb^2)
// noise), biases from the scheme and zero output weights.
NetParams rademacher_two_layer(int d, int n, int a, const BiasScheme& bias, const Activation& act,
                               std::uint64_t seed, double perturb_sigma = 0.0);

// Output weights after one correlation-loss GD step from rademacher_two_layer,
// v_i = gamma Delta(b_i) prod_{j <= d-a} w_ij - gamma tau Z_i, without data.
NetParams one_step_gd_closed_form(int d, int a, int n, double gamma, const BiasScheme& bias,
                                  const Activation& act, std::uint64_t seed, double tau);

struct HingeConfig {
  double gamma = 1e-4;
  double beta = 0.0;
  std::int64_t max_steps = 1000000;
  std::int64_t patience = 1000;  // stop after this many zero updates in a row
  std::uint64_t seed = 0;
};

struct HingeResult {
  NetParams net;
  std::int64_t nonzero_updates = 0;
  std::int64_t steps = 0;
  bool converged = false;
};

// Batch-size-one SGD on the hinge loss training every parameter.
HingeResult hinge_sgd_count_updates(NetParams net, const TargetSpec& target, const HingeConfig& cfg);

struct RescaleReport {
  double max_output_rel_error = 0.0;
  // Relative gap between gradient ratios and prod_{k != l} C_k (weights of
  // layer l) or prod_{k > l} C_k (zero biases of layer l > 0), smooth coordinates only.
  double max_grad_ratio_rel_error = 0.0;
  double max_grad_ratio = 0.0;
  double full_product = 1.0;
  bool grad_bound_ok = true;  // every ratio <= prod_l C_l
  std::size_t points = 0;
};

// Scales layer l by C_l and compares outputs and gradients on random inputs.
// Requires relu hidden layers; biases past the first layer must be zero.
RescaleReport rescale_check(const NetParams& net, const std::vector<double>& constants,
                            std::size_t n_points, std::uint64_t seed);

}  // namespace parity
