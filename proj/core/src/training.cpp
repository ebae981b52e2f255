#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "parity/errors.hpp"
#include "parity/exactcomb.hpp"
#include "parity/nets.hpp"
#include "net_kernels.hpp"

namespace parity {
namespace {

enum Tag : std::uint64_t { kBatch = 1, kNoise = 2, kData = 3, kShuffle = 4, kInit = 5, kBias = 6, kHinge = 7 };

constexpr std::size_t kChunk = 4096;

// Population gradient over the whole cube, accumulated chunk by chunk.
double population_gradient(const NetParams& net, const TargetSpec& target, const LossKind& loss,
                           NetParams& grad, bool output_only) {
  const int d = static_cast<int>(net.input_dim());
  const std::uint64_t total = std::uint64_t{1} << d;
  grad = net.zeros_like();
  NetParams part = net.zeros_like();
  double mean_loss = 0.0;
  for (std::uint64_t first = 0; first < total; first += kChunk) {
    const auto count = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, total - first));
    const Mat X = cube_slice(d, first, count);
    const Vec y = target.evaluate(X);
    const double w = static_cast<double>(count) / static_cast<double>(total);
    mean_loss += w * batch_gradient(net, X, y, loss, part, output_only);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      grad.layers[l].W += w * part.layers[l].W;
      grad.layers[l].b += w * part.layers[l].b;
    }
  }
  return mean_loss;
}

double dataset_loss(const NetParams& net, const Batch& data, const LossKind& loss) {
  double total = 0.0;
  for (Eigen::Index first = 0; first < data.X.cols(); first += static_cast<Eigen::Index>(kChunk)) {
    const Eigen::Index count = std::min<Eigen::Index>(kChunk, data.X.cols() - first);
    const Vec out = forward_batch(net, data.X.middleCols(first, count));
    for (Eigen::Index c = 0; c < count; ++c) total += loss.value(out(c), data.y(first + c));
  }
  return total / static_cast<double>(data.X.cols());
}

template <class L>
void sgd_update(std::vector<L>& layers, const std::vector<L>& grad, double gamma, double tau, bool output_only,
                std::uint64_t seed, std::int64_t step) {
  using S = typename decltype(L::W)::Scalar;
  const std::size_t first = output_only ? layers.size() - 1 : 0;
  const S rate = static_cast<S>(gamma);
  if (tau > 0.0) {
    Rng rng = make_stream(seed, {kNoise, static_cast<std::uint64_t>(step)});
    std::normal_distribution<double> noise(0.0, tau);
    for (std::size_t l = first; l < layers.size(); ++l) {
      L& layer = layers[l];
      for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
        for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
          layer.W(r, c) -= rate * (grad[l].W(r, c) + static_cast<S>(noise(rng)));
        }
      }
      if (layer.has_bias) {
        for (Eigen::Index r = 0; r < layer.b.size(); ++r) {
          layer.b(r) -= rate * (grad[l].b(r) + static_cast<S>(noise(rng)));
        }
      }
    }
    return;
  }
  for (std::size_t l = first; l < layers.size(); ++l) {
    layers[l].W.noalias() -= rate * grad[l].W;
    if (layers[l].has_bias) layers[l].b.noalias() -= rate * grad[l].b;
  }
}

using LayersF = std::vector<detail::LayerT<float>>;

double batch_gradient_f32(const NetParams& net, const LayersF& layers, const Mat& X, const Vec& y,
                          const LossKind& loss, LayersF& grad, bool output_only) {
  detail::Tape<Eigen::MatrixXf> tape;
  detail::run_forward(layers, net.act, Eigen::MatrixXf(X.cast<float>()), tape);
  const Vec yhat = detail::output_values(net.output_act, tape).cast<double>();
  const double inv = 1.0 / static_cast<double>(X.cols());
  Eigen::MatrixXf g(1, X.cols());
  double total = 0.0;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    g(0, c) = static_cast<float>(loss.derivative(yhat(c), y(c)) * inv);
    total += loss.value(yhat(c), y(c));
  }
  detail::run_backward(layers, net.act, net.output_act, tape, std::move(g), grad, output_only);
  return total * inv;
}

}  // namespace

void TrainConfig::validate(int d) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("train: learning rate must be > 0");
  if (tau < 0.0) throw std::invalid_argument("train: noise level must be >= 0");
  if (steps < 0) throw std::invalid_argument("train: steps must be >= 0");
  if (eval_every < 0) throw std::invalid_argument("train: eval_every must be >= 0");
  if (batch == kFullBatch) {
    if (offline_samples > 0) throw std::invalid_argument("train: full batch is incompatible with offline data");
    if (precision == Precision::f32) throw std::invalid_argument("train: full batch runs in double precision only");
    if (d > kMaxEnumerateDim) {
      throw ResourceLimitError("train: full batch needs d <= " + std::to_string(kMaxEnumerateDim));
    }
  }
  if (offline_samples > 0 && offline_samples < batch) {
    throw std::invalid_argument("train: offline dataset smaller than the batch");
  }
  if (eval.enumerate && d > kMaxEnumerateDim) {
    throw ResourceLimitError("train: enumerated evaluation needs d <= " + std::to_string(kMaxEnumerateDim));
  }
}

std::pair<NetParams, MetricsTrace> noisy_sgd(NetParams net, const TargetSpec& target,
                                             const TrainConfig& cfg, const LossKind& loss) {
  const int d = static_cast<int>(net.input_dim());
  cfg.validate(d);
  if (target.min_dim() > d) throw std::invalid_argument("train: target needs more input coordinates");
  const bool output_only = cfg.train_layers == TrainConfig::Layers::output_only;

  MetricsTrace trace;
  trace.test_metric = target.boolean_valued() ? "test_accuracy" : "test_loss";
  const bool f32 = cfg.precision == TrainConfig::Precision::f32;
  LayersF layers_f;
  LayersF grad_f;
  if (f32) {
    layers_f = detail::cast_layers<float>(net.layers);
    grad_f = detail::cast_layers<float>(net.zeros_like().layers);
  }
  // Refreshes the double-precision net from the f32 copy before it is read.
  auto sync = [&]() {
    if (f32) detail::copy_back(layers_f, net.layers);
  };
  auto test_metric = [&]() {
    sync();
    return target.boolean_valued() ? eval_accuracy(net, target, cfg.eval).accuracy
                                   : eval_loss(net, target, loss, cfg.eval);
  };

  Batch data;
  std::vector<Eigen::Index> order;
  std::size_t per_epoch = 0;
  if (cfg.offline_samples > 0) {
    Rng rng = make_stream(cfg.seed, {kData});
    data = parity_batch(d, target, cfg.offline_samples, rng);
    order.resize(cfg.offline_samples);
    per_epoch = cfg.offline_samples / cfg.batch;
  }

  NetParams grad = net.zeros_like();
  std::int64_t samples = 0;
  double last_loss = std::numeric_limits<double>::quiet_NaN();
  if (cfg.offline_samples > 0) last_loss = dataset_loss(net, data, loss);
  trace.points.push_back({0, 0, last_loss, test_metric()});

  Batch batch;
  std::int64_t step = 0;
  bool stopped = false;
  while (step < cfg.steps && !stopped) {
    if (cfg.batch == TrainConfig::kFullBatch) {
      last_loss = population_gradient(net, target, loss, grad, output_only);
    } else if (cfg.offline_samples == 0) {
      Rng rng = make_stream(cfg.seed, {kBatch, static_cast<std::uint64_t>(step)});
      batch = parity_batch(d, target, cfg.batch, rng);
      last_loss = f32 ? batch_gradient_f32(net, layers_f, batch.X, batch.y, loss, grad_f, output_only)
                      : batch_gradient(net, batch.X, batch.y, loss, grad, output_only);
    } else {
      const std::size_t pos = static_cast<std::size_t>(step) % per_epoch;
      if (pos == 0) {
        const auto epoch = static_cast<std::uint64_t>(step) / per_epoch;
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        Rng rng = make_stream(cfg.seed, {kShuffle, epoch});
        std::shuffle(order.begin(), order.end(), rng);
      }
      batch.X.resize(d, static_cast<Eigen::Index>(cfg.batch));
      batch.y.resize(static_cast<Eigen::Index>(cfg.batch));
      for (std::size_t c = 0; c < cfg.batch; ++c) {
        const Eigen::Index src = order[pos * cfg.batch + c];
        batch.X.col(static_cast<Eigen::Index>(c)) = data.X.col(src);
        batch.y(static_cast<Eigen::Index>(c)) = data.y(src);
      }
      last_loss = f32 ? batch_gradient_f32(net, layers_f, batch.X, batch.y, loss, grad_f, output_only)
                      : batch_gradient(net, batch.X, batch.y, loss, grad, output_only);
    }
    if (f32) {
      sgd_update(layers_f, grad_f, cfg.gamma, cfg.tau, output_only, cfg.seed, step);
    } else {
      sgd_update(net.layers, grad.layers, cfg.gamma, cfg.tau, output_only, cfg.seed, step);
    }
    ++step;
    samples += cfg.batch == TrainConfig::kFullBatch ? 0 : static_cast<std::int64_t>(cfg.batch);

    bool record = cfg.eval_every > 0 && step % cfg.eval_every == 0;
    if (cfg.offline_samples > 0 && static_cast<std::size_t>(step) % per_epoch == 0) {
      sync();
      last_loss = dataset_loss(net, data, loss);
      if (last_loss < cfg.stop_loss) {
        stopped = true;
        record = true;
      }
    }
    if (record) trace.points.push_back({step, samples, last_loss, test_metric()});
  }
  if (trace.points.back().step != step) trace.points.push_back({step, samples, last_loss, test_metric()});
  sync();
  return {std::move(net), std::move(trace)};
}

NetParams rademacher_two_layer(int d, int n, int a, const BiasScheme& bias, const Activation& act,
                               std::uint64_t seed, double perturb_sigma) {
  if (d < 1 || n < 1) throw std::invalid_argument("two-layer net needs d >= 1 and n >= 1");
  if (perturb_sigma < 0.0) throw std::invalid_argument("perturbation must be >= 0");
  NetParams net;
  net.act = act;
  Layer hidden;
  hidden.has_bias = true;
  hidden.W.resize(n, d);
  hidden.b.resize(n);
  Rng rng = make_stream(seed, {kInit});
  std::normal_distribution<double> normal(0.0, perturb_sigma > 0.0 ? perturb_sigma : 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) {
      hidden.W(i, j) = (rng() >> 63) ? 1.0 : -1.0;
      if (perturb_sigma > 0.0) hidden.W(i, j) += normal(rng);
    }
  }
  Rng coin_rng = make_stream(seed, {kBias});
  for (int i = 0; i < n; ++i) {
    switch (bias.kind) {
      case BiasScheme::Kind::parity:
        hidden.b(i) = parity_bias(d);
        break;
      case BiasScheme::Kind::almost_full:
        hidden.b(i) = d % 2 == 0 ? -2.0 : -1.0;
        break;
      case BiasScheme::Kind::coin:
        hidden.b(i) = coin_bias(a, (coin_rng() >> 63) != 0);
        break;
      case BiasScheme::Kind::fixed:
        hidden.b(i) = bias.value;
        break;
    }
  }
  Layer out;
  out.has_bias = false;
  out.W = Mat::Zero(1, n);
  out.b = Vec::Zero(1);
  net.layers.push_back(std::move(hidden));
  net.layers.push_back(std::move(out));
  return net;
}

NetParams one_step_gd_closed_form(int d, int a, int n, double gamma, const BiasScheme& bias,
                                  const Activation& act, std::uint64_t seed, double tau) {
  if (a < 0 || d - a < 1) throw std::invalid_argument("one-step: need 0 <= a < d");
  NetParams net = rademacher_two_layer(d, n, a, bias, act, seed, 0.0);
  const Mat& W = net.layers[0].W;
  const Vec& b = net.layers[0].b;
  std::map<double, double> deltas;
  Rng rng = make_stream(seed, {kNoise, 0});
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat& v = net.layers[1].W;
  for (int i = 0; i < n; ++i) {
    auto it = deltas.find(b(i));
    if (it == deltas.end()) it = deltas.emplace(b(i), delta({d, a, b(i), act})).first;
    double sign = 1.0;
    for (int j = 0; j < d - a; ++j) sign *= W(i, j);
    v(0, i) = gamma * it->second * sign;
    if (tau > 0.0) v(0, i) -= gamma * tau * normal(rng);
  }
  return net;
}

HingeResult hinge_sgd_count_updates(NetParams net, const TargetSpec& target, const HingeConfig& cfg) {
  if (net.layers.size() != 2 || net.output_act) {
    throw std::invalid_argument("hinge SGD expects a two-layer net with a linear output");
  }
  if (!(cfg.gamma > 0.0) || cfg.beta < 0.0 || cfg.patience < 1) {
    throw std::invalid_argument("hinge SGD: need gamma > 0, beta >= 0, patience >= 1");
  }
  const int d = static_cast<int>(net.input_dim());
  if (target.min_dim() > d) throw std::invalid_argument("hinge SGD: target needs more coordinates");
  Layer& hidden = net.layers[0];
  Layer& out = net.layers[1];
  const Activation act = net.act;

  HingeResult res;
  std::int64_t zero_run = 0;
  Vec x(d), z, h, gate;
  for (std::int64_t step = 0; step < cfg.max_steps; ++step) {
    Rng rng = make_stream(cfg.seed, {kHinge, static_cast<std::uint64_t>(step)});
    x = random_inputs(d, 1, rng).col(0);
    const double y = target(x.data());
    z.noalias() = hidden.W * x;
    z += hidden.b;
    h = z.unaryExpr([act](double t) { return act(t); });
    double yhat = out.W.row(0).dot(h);
    if (out.has_bias) yhat += out.b(0);
    ++res.steps;
    if (y * yhat < cfg.beta) {
      // Descent direction is +y grad(NN); the hidden update uses the old v.
      gate = z.unaryExpr([act](double t) { return act.derivative(t); }).cwiseProduct(out.W.row(0).transpose());
      hidden.W.noalias() += (cfg.gamma * y) * gate * x.transpose();
      hidden.b.noalias() += (cfg.gamma * y) * gate;
      out.W.row(0).noalias() += (cfg.gamma * y) * h.transpose();
      if (out.has_bias) out.b(0) += cfg.gamma * y;
      ++res.nonzero_updates;
      zero_run = 0;
    } else if (++zero_run >= cfg.patience) {
      res.converged = true;
      break;
    }
  }
  res.net = std::move(net);
  return res;
}

}  // namespace parity
