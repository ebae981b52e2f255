#include "parity/nets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parity/errors.hpp"
#include "parity/exactcomb.hpp"
#include "net_kernels.hpp"

namespace parity {
namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t kChunk = 4096;

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw std::invalid_argument("bad number in " + what);
  return v;
}

std::pair<std::string, std::string> split_colon(const std::string& text) {
  const auto pos = text.find(':');
  if (pos == std::string::npos) return {text, ""};
  return {text.substr(0, pos), text.substr(pos + 1)};
}

using Tape = detail::Tape<Mat>;

void run_forward(const NetParams& net, const Mat& X, Tape& tape) {
  detail::run_forward(net.layers, net.act, X, tape);
}

void run_backward(const NetParams& net, const Tape& tape, Mat g, NetParams& grad, bool output_only) {
  detail::run_backward(net.layers, net.act, net.output_act, tape, std::move(g), grad.layers, output_only);
}

Vec output_from(const NetParams& net, const Tape& tape) {
  return detail::output_values(net.output_act, tape);
}

void ensure_shape(const NetParams& net, NetParams& grad) {
  if (grad.layers.size() != net.layers.size()) {
    grad = net.zeros_like();
    return;
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (grad.layers[l].W.rows() != net.layers[l].W.rows() ||
        grad.layers[l].W.cols() != net.layers[l].W.cols()) {
      grad = net.zeros_like();
      return;
    }
  }
}

void check_input(const NetParams& net, Eigen::Index rows) {
  if (net.layers.empty()) throw std::invalid_argument("network has no layers");
  if (rows != net.input_dim()) throw std::invalid_argument("input dimension does not match network");
  if (net.layers.back().W.rows() != 1) throw std::invalid_argument("network output must be scalar");
}

}  // namespace

// ---------------------------------------------------------------- InitSpec

void InitSpec::validate() const {
  if (sigma < 0.0) throw std::invalid_argument("init: sigma must be >= 0");
  if (s < 0.0 || s >= 1.0) throw std::invalid_argument("init: sparsity s must lie in [0, 1)");
}

double InitSpec::sample(Rng& rng, double dim) const {
  auto rad = [&]() { return (rng() >> 63) ? 1.0 : -1.0; };
  switch (family) {
    case Family::gaussian:
      return std::normal_distribution<double>(0.0, 1.0 / std::sqrt(dim))(rng);
    case Family::rademacher:
      return rad() / std::sqrt(dim);
    case Family::perturbed_rademacher: {
      const double r = rad();
      const double g = sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(rng) : 0.0;
      return (r + g) / std::sqrt(dim * (1.0 + sigma * sigma));
    }
    case Family::uniform_perturbed: {
      const double r = rad();
      const double h = std::sqrt(3.0) * sigma;
      const double u = sigma > 0.0 ? std::uniform_real_distribution<double>(-h, h)(rng) : 0.0;
      return (r + u) / std::sqrt(dim * (1.0 + sigma * sigma));
    }
    case Family::sparsified_rademacher: {
      const bool keep = std::bernoulli_distribution(1.0 - s)(rng);
      const double r = rad();
      return keep ? r / std::sqrt(dim * (1.0 - s)) : 0.0;
    }
    case Family::discrete_symmetric: {
      static constexpr double kValues[4] = {-2.0, -1.0, 1.0, 2.0};
      const int i = std::uniform_int_distribution<int>(0, 3)(rng);
      return kValues[i] * std::sqrt(2.0 / (5.0 * dim));
    }
  }
  return 0.0;
}

std::string InitSpec::name() const {
  auto num = [](double v) {
    std::string t = std::to_string(v);
    t.erase(t.find_last_not_of('0') + 1);
    if (!t.empty() && t.back() == '.') t.pop_back();
    return t;
  };
  switch (family) {
    case Family::gaussian:
      return "gaussian";
    case Family::rademacher:
      return "rademacher";
    case Family::perturbed_rademacher:
      return "perturbed:" + num(sigma);
    case Family::uniform_perturbed:
      return "uniform:" + num(sigma);
    case Family::sparsified_rademacher:
      return "sparsified:" + num(s);
    case Family::discrete_symmetric:
      return "discrete";
  }
  return "?";
}

InitSpec InitSpec::parse(const std::string& text) {
  const auto [head, arg] = split_colon(text);
  InitSpec spec;
  if (head == "gaussian") {
    spec = gaussian();
  } else if (head == "rademacher") {
    spec = rademacher();
  } else if (head == "perturbed") {
    spec = perturbed(parse_number(arg, "init '" + text + "'"));
  } else if (head == "uniform") {
    spec = uniform_perturbed(parse_number(arg, "init '" + text + "'"));
  } else if (head == "sparsified") {
    spec = sparsified(parse_number(arg, "init '" + text + "'"));
  } else if (head == "discrete") {
    spec = discrete();
  } else {
    throw std::invalid_argument("unknown init family '" + text + "'");
  }
  spec.validate();
  return spec;
}

Mat sample_init(const InitSpec& spec, Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  spec.validate();
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = spec.sample(rng, static_cast<double>(cols));
  }
  return m;
}

Mat sample_init(const InitSpec& spec, Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng = make_stream(seed, {hash_string("init")});
  return sample_init(spec, rows, cols, rng);
}

// ---------------------------------------------------------------- NetParams

std::size_t NetParams::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.W.size() + (l.has_bias ? l.b.size() : 0);
  return n;
}

Vec NetParams::flatten() const {
  Vec theta(param_count());
  Eigen::Index off = 0;
  for (const auto& l : layers) {
    Eigen::Map<RowMajor>(theta.data() + off, l.W.rows(), l.W.cols()) = l.W;
    off += l.W.size();
    if (l.has_bias) {
      theta.segment(off, l.b.size()) = l.b;
      off += l.b.size();
    }
  }
  return theta;
}

void NetParams::unflatten(const Vec& theta) {
  if (static_cast<std::size_t>(theta.size()) != param_count()) {
    throw std::invalid_argument("unflatten: parameter count mismatch");
  }
  Eigen::Index off = 0;
  for (auto& l : layers) {
    l.W = Eigen::Map<const RowMajor>(theta.data() + off, l.W.rows(), l.W.cols());
    off += l.W.size();
    if (l.has_bias) {
      l.b = theta.segment(off, l.b.size());
      off += l.b.size();
    }
  }
}

NetParams NetParams::zeros_like() const {
  NetParams z = *this;
  for (auto& l : z.layers) {
    l.W.setZero();
    l.b = Vec::Zero(l.W.rows());
  }
  return z;
}

std::size_t NetParams::layer_of(std::size_t p) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    off += layers[i].W.size() + (layers[i].has_bias ? layers[i].b.size() : 0);
    if (p < off) return i;
  }
  throw std::out_of_range("layer_of: coordinate out of range");
}

NetParams make_net(const NetworkSpec& spec, const InitSpec& init, Rng& rng) {
  if (spec.input_dim < 1) throw std::invalid_argument("network input dimension must be >= 1");
  NetParams net;
  net.act = spec.act;
  net.output_act = spec.output_act;
  int fan_in = spec.input_dim;
  std::vector<int> widths = spec.hidden;
  widths.push_back(1);
  for (int w : widths) {
    if (w < 1) throw std::invalid_argument("layer width must be >= 1");
    Layer layer;
    layer.has_bias = spec.bias;
    layer.W = sample_init(init, w, fan_in, rng);
    layer.b = Vec::Zero(w);
    if (spec.bias) {
      for (int r = 0; r < w; ++r) layer.b(r) = init.sample(rng, static_cast<double>(fan_in));
    }
    net.layers.push_back(std::move(layer));
    fan_in = w;
  }
  return net;
}

NetParams make_net(const NetworkSpec& spec, const InitSpec& init, std::uint64_t seed) {
  Rng rng = make_stream(seed, {hash_string("init")});
  return make_net(spec, init, rng);
}

// ---------------------------------------------------------------- Loss

double LossKind::value(double yhat, double y) const {
  switch (kind) {
    case Kind::correlation:
      return -y * yhat;
    case Kind::hinge:
      return std::max(0.0, beta - y * yhat);
    case Kind::squared:
      return (yhat - y) * (yhat - y);
    case Kind::l1:
      return std::fabs(yhat - y);
  }
  return 0.0;
}

double LossKind::derivative(double yhat, double y) const {
  switch (kind) {
    case Kind::correlation:
      return -y;
    case Kind::hinge:
      return (y * yhat < beta) ? -y : 0.0;
    case Kind::squared:
      return 2.0 * (yhat - y);
    case Kind::l1:
      return yhat > y ? 1.0 : (yhat < y ? -1.0 : 0.0);
  }
  return 0.0;
}

std::string LossKind::name() const {
  switch (kind) {
    case Kind::correlation:
      return "correlation";
    case Kind::hinge: {
      std::string b = std::to_string(beta);
      b.erase(b.find_last_not_of('0') + 1);
      if (!b.empty() && b.back() == '.') b.pop_back();
      return "hinge:" + b;
    }
    case Kind::squared:
      return "squared";
    case Kind::l1:
      return "l1";
  }
  return "?";
}

LossKind LossKind::parse(const std::string& text) {
  const auto [head, arg] = split_colon(text);
  if (head == "correlation") return correlation();
  if (head == "squared" || head == "l2") return squared();
  if (head == "l1") return l1();
  if (head == "hinge") {
    const double beta = arg.empty() ? 1.0 : parse_number(arg, "loss '" + text + "'");
    if (beta < 0.0) throw std::invalid_argument("hinge margin must be >= 0");
    return hinge(beta);
  }
  throw std::invalid_argument("unknown loss '" + text + "'");
}

// ---------------------------------------------------------------- Targets

TargetSpec TargetSpec::parity(std::vector<int> support) {
  if (support.empty()) throw std::invalid_argument("parity support must be nonempty");
  std::sort(support.begin(), support.end());
  if (support.front() < 0 || std::adjacent_find(support.begin(), support.end()) != support.end()) {
    throw std::invalid_argument("parity support must hold distinct nonnegative indices");
  }
  return {Kind::parity, std::move(support)};
}

TargetSpec TargetSpec::full_parity(int d) { return co_degree(d, 0); }

TargetSpec TargetSpec::co_degree(int d, int a) {
  if (d - a < 1) throw std::invalid_argument("parity degree d - a must be >= 1");
  std::vector<int> s(d - a);
  for (int i = 0; i < d - a; ++i) s[i] = i;
  return parity(std::move(s));
}

int TargetSpec::min_dim() const { return kind == Kind::parity ? support.back() + 1 : 4; }

double TargetSpec::operator()(const double* x) const {
  if (kind == Kind::leap_poly) {
    return 0.125 * x[0] * x[1] * x[2] + 0.375 * x[0] * x[1] * x[3] + 0.25 * x[0] * x[2] * x[3] +
           0.25 * x[1] * x[2] * x[3];
  }
  double p = 1.0;
  for (int i : support) p *= x[i];
  return p;
}

Vec TargetSpec::evaluate(const Mat& X) const {
  if (X.rows() < min_dim()) throw std::invalid_argument("target needs more input coordinates");
  Vec y(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) y(c) = (*this)(X.col(c).data());
  return y;
}

BiasScheme BiasScheme::parse(const std::string& text) {
  const auto [head, arg] = split_colon(text);
  if (head == "parity") return parity();
  if (head == "almost_full") return almost_full();
  if (head == "coin") return coin();
  if (head == "fixed") return fixed(parse_number(arg, "bias scheme '" + text + "'"));
  throw std::invalid_argument("unknown bias scheme '" + text + "'");
}

// ---------------------------------------------------------------- Evaluation

double forward(const NetParams& net, const Vec& x) {
  Mat X = x;
  return forward_batch(net, X)(0);
}

Vec forward_batch(const NetParams& net, const Mat& X) {
  check_input(net, X.rows());
  Tape tape;
  run_forward(net, X, tape);
  return output_from(net, tape);
}

Vec output_grad(const NetParams& net, const Vec& x) {
  check_input(net, x.size());
  Tape tape;
  Mat X = x;
  run_forward(net, X, tape);
  NetParams grad = net.zeros_like();
  run_backward(net, tape, Mat::Ones(1, 1), grad, false);
  return grad.flatten();
}

Vec loss_grad(const NetParams& net, const Vec& x, double y, const LossKind& loss) {
  const double yhat = forward(net, x);
  return loss.derivative(yhat, y) * output_grad(net, x);
}

Vec weighted_gradient(const NetParams& net, const Mat& X,
                      const std::function<double(Eigen::Index, double)>& weight, NetParams& grad,
                      bool output_only) {
  check_input(net, X.rows());
  ensure_shape(net, grad);
  Tape tape;
  run_forward(net, X, tape);
  Vec yhat = output_from(net, tape);
  Mat g(1, X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) g(0, c) = weight(c, yhat(c));
  run_backward(net, tape, std::move(g), grad, output_only);
  return yhat;
}

double batch_gradient(const NetParams& net, const Mat& X, const Vec& y, const LossKind& loss,
                      NetParams& grad, bool output_only) {
  const double inv = 1.0 / static_cast<double>(X.cols());
  const Vec yhat = weighted_gradient(
      net, X, [&](Eigen::Index c, double out) { return loss.derivative(out, y(c)) * inv; }, grad,
      output_only);
  double total = 0.0;
  for (Eigen::Index c = 0; c < X.cols(); ++c) total += loss.value(yhat(c), y(c));
  return total * inv;
}

Mat random_inputs(int d, std::size_t count, Rng& rng) {
  Mat X(d, static_cast<Eigen::Index>(count));
  std::uint64_t bits = 0;
  int left = 0;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    for (int i = 0; i < d; ++i) {
      if (left == 0) {
        bits = rng();
        left = 64;
      }
      X(i, c) = (bits & 1u) ? -1.0 : 1.0;
      bits >>= 1;
      --left;
    }
  }
  return X;
}

Batch parity_batch(int d, const TargetSpec& target, std::size_t count, Rng& rng) {
  Batch b;
  b.X = random_inputs(d, count, rng);
  b.y = target.evaluate(b.X);
  return b;
}

Batch parity_batch(int d, const std::vector<int>& support, std::size_t count, std::uint64_t seed) {
  Rng rng = make_stream(seed, {hash_string("batch")});
  return parity_batch(d, TargetSpec::parity(support), count, rng);
}

Mat cube_slice(int d, std::uint64_t first, std::size_t count) {
  Mat X(d, static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const std::uint64_t idx = first + static_cast<std::uint64_t>(c);
    for (int i = 0; i < d; ++i) X(i, c) = ((idx >> i) & 1u) ? -1.0 : 1.0;
  }
  return X;
}

namespace {

// Calls fn(X) over the evaluation inputs in fixed-size chunks.
template <class Fn>
void for_each_eval_chunk(int d, const EvalSpec& eval, Fn fn) {
  if (eval.enumerate) {
    if (d > kMaxEnumerateDim) {
      throw ResourceLimitError("enumeration limited to d <= " + std::to_string(kMaxEnumerateDim));
    }
    const std::uint64_t total = std::uint64_t{1} << d;
    for (std::uint64_t first = 0; first < total; first += kChunk) {
      fn(cube_slice(d, first, static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, total - first))));
    }
    return;
  }
  Rng rng = make_stream(eval.seed, {hash_string("test")});
  for (std::size_t done = 0; done < eval.samples; done += kChunk) {
    fn(random_inputs(d, std::min(kChunk, eval.samples - done), rng));
  }
}

}  // namespace

AccuracyReport eval_accuracy(const NetParams& net, const TargetSpec& target, const EvalSpec& eval) {
  if (!target.boolean_valued()) throw std::invalid_argument("accuracy needs a +-1 valued target");
  AccuracyReport rep;
  std::size_t correct = 0;
  for_each_eval_chunk(static_cast<int>(net.input_dim()), eval, [&](const Mat& X) {
    const Vec out = forward_batch(net, X);
    const Vec y = target.evaluate(X);
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      if (out(c) == 0.0) {
        ++rep.zero_outputs;
      } else if ((out(c) > 0.0) == (y(c) > 0.0)) {
        ++correct;
      }
    }
    rep.total += static_cast<std::size_t>(X.cols());
  });
  rep.accuracy = rep.total ? static_cast<double>(correct) / static_cast<double>(rep.total) : 0.0;
  rep.degenerate = rep.total > 0 && rep.zero_outputs == rep.total;
  return rep;
}

double eval_loss(const NetParams& net, const TargetSpec& target, const LossKind& loss,
                 const EvalSpec& eval) {
  double total = 0.0;
  std::size_t count = 0;
  for_each_eval_chunk(static_cast<int>(net.input_dim()), eval, [&](const Mat& X) {
    const Vec out = forward_batch(net, X);
    const Vec y = target.evaluate(X);
    for (Eigen::Index c = 0; c < X.cols(); ++c) total += loss.value(out(c), y(c));
    count += static_cast<std::size_t>(X.cols());
  });
  return count ? total / static_cast<double>(count) : 0.0;
}

// ---------------------------------------------------------------- Rescaling

RescaleReport rescale_check(const NetParams& net, const std::vector<double>& constants,
                            std::size_t n_points, std::uint64_t seed) {
  if (constants.size() != net.layers.size()) {
    throw std::invalid_argument("rescale_check: one constant per layer required");
  }
  if (net.act.kind != Activation::Kind::relu || net.output_act) {
    throw std::invalid_argument("rescale_check: needs relu hidden layers and a linear output");
  }
  for (std::size_t l = 1; l < net.layers.size(); ++l) {
    if (net.layers[l].has_bias && net.layers[l].b.cwiseAbs().maxCoeff() != 0.0) {
      throw std::invalid_argument("rescale_check: biases allowed in the first layer only");
    }
  }
  RescaleReport rep;
  for (double c : constants) {
    if (!(c > 0.0)) throw std::invalid_argument("rescale_check: constants must be positive");
    rep.full_product *= c;
  }
  NetParams scaled = net;
  for (std::size_t l = 0; l < scaled.layers.size(); ++l) {
    scaled.layers[l].W *= constants[l];
    scaled.layers[l].b *= constants[l];
  }
  // Expected gradient ratio per coordinate: weights of layer l see every other
  // layer's constant, a (zero) bias of layer l only the downstream ones.
  std::vector<double> expect_ratio;
  expect_ratio.reserve(net.param_count());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    double downstream = 1.0;
    for (std::size_t k = l + 1; k < net.layers.size(); ++k) downstream *= constants[k];
    expect_ratio.insert(expect_ratio.end(), static_cast<std::size_t>(net.layers[l].W.size()),
                        rep.full_product / constants[l]);
    if (net.layers[l].has_bias) {
      expect_ratio.insert(expect_ratio.end(), static_cast<std::size_t>(net.layers[l].b.size()), downstream);
    }
  }

  Rng rng = make_stream(seed, {hash_string("rescale")});
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = net.input_dim();
  for (std::size_t i = 0; i < n_points; ++i) {
    Vec x(d);
    for (Eigen::Index j = 0; j < d; ++j) x(j) = normal(rng);
    const double ref = rep.full_product * forward(net, x);
    const double got = forward(scaled, x);
    const double err = std::fabs(got - ref);
    rep.max_output_rel_error =
        std::max(rep.max_output_rel_error, ref != 0.0 ? err / std::fabs(ref) : err);

    const Vec g = output_grad(net, x);
    const Vec gs = output_grad(scaled, x);
    const double gmax = g.cwiseAbs().maxCoeff();
    for (Eigen::Index p = 0; p < g.size(); ++p) {
      if (std::fabs(g(p)) <= 1e-12 * gmax) continue;
      const double ratio = gs(p) / g(p);
      const double expect = expect_ratio[static_cast<std::size_t>(p)];
      rep.max_grad_ratio_rel_error = std::max(rep.max_grad_ratio_rel_error, std::fabs(ratio - expect) / expect);
      rep.max_grad_ratio = std::max(rep.max_grad_ratio, std::fabs(ratio));
      if (std::fabs(ratio) > rep.full_product * (1.0 + 1e-9)) rep.grad_bound_ok = false;
    }
    ++rep.points;
  }
  return rep;
}

}  // namespace parity
