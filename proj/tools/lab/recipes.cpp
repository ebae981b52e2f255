#include "recipes.hpp"

#include <cmath>

#include "parity/alignment.hpp"
#include "parity/errors.hpp"
#include "parity/exactcomb.hpp"
#include "parity/nets.hpp"

namespace lab {
namespace {

using namespace parity;

// ---------------------------------------------------------------- accessors

const json& field(const json& p, const std::string& key) {
  if (!p.contains(key)) throw ParamError(key, "missing parameter '" + key + "'");
  return p.at(key);
}

double num(const json& p, const std::string& key) {
  const json& v = field(p, key);
  if (!v.is_number()) throw ParamError(key, "'" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& p, const std::string& key, std::int64_t lo) {
  const json& v = field(p, key);
  if (!v.is_number_integer()) throw ParamError(key, "'" + key + "' must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < lo) throw ParamError(key, "'" + key + "' must be >= " + std::to_string(lo));
  return x;
}

std::string str(const json& p, const std::string& key) {
  const json& v = field(p, key);
  if (!v.is_string()) throw ParamError(key, "'" + key + "' must be a string");
  return v.get<std::string>();
}

bool flag(const json& p, const std::string& key) {
  const json& v = field(p, key);
  if (!v.is_boolean()) throw ParamError(key, "'" + key + "' must be true or false");
  return v.get<bool>();
}

template <class T>
std::vector<T> list(const json& p, const std::string& key, bool allow_empty = false) {
  const json& v = field(p, key);
  if (!v.is_array() || (!allow_empty && v.empty())) throw ParamError(key, "'" + key + "' must be a nonempty list");
  std::vector<T> out;
  for (const auto& e : v) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!e.is_string()) throw ParamError(key, "'" + key + "' must hold strings");
    } else if constexpr (std::is_integral_v<T>) {
      if (!e.is_number_integer()) throw ParamError(key, "'" + key + "' must hold integers");
    } else {
      if (!e.is_number()) throw ParamError(key, "'" + key + "' must hold numbers");
    }
    out.push_back(e.get<T>());
  }
  return out;
}

template <class F>
auto parse_as(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ParamError(key, "'" + key + "': " + e.what());
  }
}

std::uint64_t derive(std::uint64_t stream, std::uint64_t tag) { return make_stream(stream, {tag})(); }

TargetSpec parse_target(const std::string& text, int d) {
  if (text == "full") return TargetSpec::full_parity(d);
  if (text == "leap") return TargetSpec::leap_poly();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    const int k = std::stoi(text.substr(colon + 1));
    if (kind == "parity") {
      if (k < 1 || k > d) throw std::invalid_argument("parity degree must lie in [1, d]");
      std::vector<int> support(k);
      for (int i = 0; i < k; ++i) support[i] = i;
      return TargetSpec::parity(support);
    }
    if (kind == "codegree") return TargetSpec::co_degree(d, k);
  }
  throw std::invalid_argument("unknown target '" + text + "' (full, leap, parity:<k>, codegree:<a>)");
}

// ---------------------------------------------------------------- training jobs

const std::vector<std::string> kTrainKeys = {
    "d",       "hidden",    "activation",  "bias",         "init",        "loss",          "target",
    "lr",      "batch",     "steps",       "tau",          "offline_samples", "stop_loss", "train_layers",
    "zero_output", "eval", "eval_points", "eval_samples", "gal_theta",   "gal_inner",  "precision"};

const json kTrainDefaults = {
    {"d", 50},          {"hidden", {512, 512, 64}}, {"activation", "relu"}, {"bias", true},
    {"init", "rademacher"}, {"loss", "hinge:1"},    {"target", "full"},     {"lr", 0.01},
    {"batch", 64},      {"steps", 40000},           {"tau", 0.0},           {"offline_samples", 0},
    {"stop_loss", 0.01}, {"train_layers", "all"},   {"zero_output", false}, {"eval", "sample"},
    {"eval_points", 10}, {"eval_samples", 4096},    {"gal_theta", 0},       {"gal_inner", 512},
    {"precision", "f64"}};

// Copy the training keys from `params`, falling back to the training defaults.
json train_point(const json& params) {
  json pt = json::object();
  for (const auto& k : kTrainKeys) pt[k] = params.contains(k) ? params.at(k) : kTrainDefaults.at(k);
  return pt;
}

struct TrainSetup {
  NetworkSpec spec;
  InitSpec init;
  LossKind loss;
  TargetSpec target;
  TrainConfig cfg;
  bool zero_output = false;
  std::size_t gal_theta = 0;
  std::size_t gal_inner = 0;
};

TrainSetup train_setup(const json& pt) {
  TrainSetup s;
  const int d = static_cast<int>(integer(pt, "d", 1));
  s.spec.input_dim = d;
  for (int w : list<int>(pt, "hidden", true)) {
    if (w < 1) throw ParamError("hidden", "layer widths must be >= 1");
    s.spec.hidden.push_back(w);
  }
  s.spec.act = parse_as("activation", [&] { return Activation::parse(str(pt, "activation")); });
  s.spec.bias = flag(pt, "bias");
  s.init = parse_as("init", [&] { return InitSpec::parse(str(pt, "init")); });
  s.loss = parse_as("loss", [&] { return LossKind::parse(str(pt, "loss")); });
  s.target = parse_as("target", [&] { return parse_target(str(pt, "target"), d); });
  if (s.target.min_dim() > d) throw ParamError("target", "target needs more than d coordinates");

  auto& c = s.cfg;
  c.gamma = num(pt, "lr");
  if (!(c.gamma > 0.0)) throw ParamError("lr", "'lr' must be > 0");
  c.batch = static_cast<std::size_t>(integer(pt, "batch", 0));
  c.steps = integer(pt, "steps", 0);
  c.tau = num(pt, "tau");
  if (c.tau < 0.0) throw ParamError("tau", "'tau' must be >= 0");
  c.offline_samples = static_cast<std::size_t>(integer(pt, "offline_samples", 0));
  if (c.offline_samples > 0 && c.offline_samples < c.batch)
    throw ParamError("offline_samples", "'offline_samples' must be >= batch");
  c.stop_loss = num(pt, "stop_loss");
  const std::string layers = str(pt, "train_layers");
  if (layers == "all") {
    c.train_layers = TrainConfig::Layers::all;
  } else if (layers == "output_only") {
    c.train_layers = TrainConfig::Layers::output_only;
  } else {
    throw ParamError("train_layers", "'train_layers' must be all or output_only");
  }
  const std::string precision = str(pt, "precision");
  if (precision == "f64") {
    c.precision = TrainConfig::Precision::f64;
  } else if (precision == "f32") {
    c.precision = TrainConfig::Precision::f32;
    if (c.batch == TrainConfig::kFullBatch) throw ParamError("precision", "'precision' f32 needs a minibatch");
  } else {
    throw ParamError("precision", "'precision' must be f64 or f32");
  }
  const std::string eval = str(pt, "eval");
  if (eval != "sample" && eval != "enumerate") throw ParamError("eval", "'eval' must be sample or enumerate");
  c.eval.enumerate = eval == "enumerate";
  c.eval.samples = static_cast<std::size_t>(integer(pt, "eval_samples", 1));
  const auto points = integer(pt, "eval_points", 1);
  c.eval_every = std::max<std::int64_t>(1, c.steps / points);
  s.zero_output = flag(pt, "zero_output");
  s.gal_theta = static_cast<std::size_t>(integer(pt, "gal_theta", 0));
  s.gal_inner = static_cast<std::size_t>(integer(pt, "gal_inner", 2));
  if (s.gal_theta == 1) throw ParamError("gal_theta", "'gal_theta' must be 0 or >= 2");
  if (!s.target.boolean_valued() && c.eval.enumerate == false && c.eval.samples < 2)
    throw ParamError("eval_samples", "'eval_samples' must be >= 2");
  c.validate(d);  // ResourceLimitError passes through
  return s;
}

void validate_train(const json& pt) { train_setup(pt); }

std::vector<Record> run_train(const json& pt, std::uint64_t stream) {
  TrainSetup s = train_setup(pt);
  s.cfg.seed = derive(stream, 1);
  s.cfg.eval.seed = derive(stream, 2);
  Rng init_rng = make_stream(stream, {3});
  NetParams net = make_net(s.spec, s.init, init_rng);
  if (s.zero_output) {
    net.layers.back().W.setZero();
    net.layers.back().b.setZero();
  }
  std::vector<Record> out;
  if (s.gal_theta > 0) {
    const GalResult g = gal_mc(s.spec, s.init, s.loss, s.target, s.gal_theta, s.gal_inner, derive(stream, 4));
    out.push_back({"", "", 0, 0, "gal_init", g.estimate});
    out.push_back({"", "", 0, 0, "gal_init_se", g.std_err});
  }
  auto [trained, trace] = noisy_sgd(std::move(net), s.target, s.cfg, s.loss);
  for (const auto& p : trace.points) {
    out.push_back({"", "", 0, p.step, trace.test_metric, p.test_metric});
    out.push_back({"", "", 0, p.step, "train_loss", p.train_loss});
  }
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Common shape of the MLP recipes: copy the shared keys, then vary one axis.
std::int64_t steps_from_samples(const json& p) {
  const auto samples = integer(p, "train_samples", 1);
  const auto batch = integer(p, "batch", 1);
  return std::max<std::int64_t>(1, samples / batch);
}

json mlp_defaults(json extra) {
  json d = {{"d", 50},           {"hidden", {512, 512, 64}}, {"activation", "relu"}, {"loss", "hinge:1"},
            {"lr", 0.01},        {"batch", 64},              {"train_samples", 7680000}, {"tau", 0.0},
            {"eval_points", 10}, {"eval_samples", 4096},   {"bias", true},           {"offline_samples", 0},
            {"stop_loss", 0.01}, {"precision", "f32"}};
  for (auto it = extra.begin(); it != extra.end(); ++it) d[it.key()] = it.value();
  return d;
}

// ---------------------------------------------------------------- GAL jobs

struct NeuronSetup {
  NetworkSpec spec;
  InitSpec init;
  LossKind loss;
  std::size_t n_theta, n_inner;
  std::size_t coordinate;
};

NeuronSetup neuron_setup(const json& pt) {
  NeuronSetup s;
  const int d = static_cast<int>(integer(pt, "d", 2));
  const Activation act = parse_as("activation", [&] { return Activation::parse(str(pt, "activation")); });
  s.spec = NetworkSpec{d, {}, act, false, act};
  s.init = parse_as("init", [&] { return InitSpec::parse(str(pt, "init")); });
  s.loss = parse_as("loss", [&] { return LossKind::parse(str(pt, "loss")); });
  s.n_theta = static_cast<std::size_t>(integer(pt, "n_theta", 2));
  s.n_inner = static_cast<std::size_t>(integer(pt, "n_inner", 2));
  s.coordinate = static_cast<std::size_t>(d - 1);
  return s;
}

std::vector<Record> gal_records(const GalResult& g, std::int64_t step) {
  return {{"", "", 0, step, "gal", g.value},
          {"", "", 0, step, "gal_estimate", g.estimate},
          {"", "", 0, step, "gal_se", g.std_err}};
}

// ---------------------------------------------------------------- registry

std::vector<RecipeDef> build() {
  std::vector<RecipeDef> r;

  // Full parity with sigma-perturbed Rademacher initialization.
  r.push_back({"sigma_sweep", mlp_defaults({{"sigmas", {0.0, 0.5, 1.0}}}),
               [](const json& p) {
                 std::vector<json> pts;
                 for (double s : list<double>(p, "sigmas")) {
                   if (s < 0) throw ParamError("sigmas", "sigmas must be >= 0");
                   json pt = train_point(p);
                   pt["init"] = "perturbed:" + fmt(s);
                   pt["steps"] = steps_from_samples(p);
                   pts.push_back(pt);
                 }
                 return pts;
               },
               validate_train, run_train});

  r.push_back({"other_inits",
               mlp_defaults({{"inits",
                              {"uniform:0.1", "uniform:1", "sparsified:0.5", "sparsified:0.333333", "sparsified:0.2",
                               "discrete"}}}),
               [](const json& p) {
                 std::vector<json> pts;
                 for (const auto& init : list<std::string>(p, "inits")) {
                   json pt = train_point(p);
                   pt["init"] = init;
                   pt["steps"] = steps_from_samples(p);
                   pts.push_back(pt);
                 }
                 return pts;
               },
               validate_train, run_train});

  // Offline training on sparse parities for several dataset sizes.
  r.push_back({"sparse_parity",
               mlp_defaults({{"degrees", {3, 5}},
                             {"inits", {"rademacher", "perturbed:0.1", "perturbed:1", "gaussian"}},
                             {"dataset_sizes", {1000, 4000}},
                             {"max_steps", 20000}}),
               [](const json& p) {
                 std::vector<json> pts;
                 for (int k : list<int>(p, "degrees"))
                   for (const auto& init : list<std::string>(p, "inits"))
                     for (int n : list<int>(p, "dataset_sizes")) {
                       json pt = train_point(p);
                       pt["target"] = "parity:" + std::to_string(k);
                       pt["init"] = init;
                       pt["offline_samples"] = n;
                       pt["steps"] = integer(p, "max_steps", 1);
                       pts.push_back(pt);
                     }
                 return pts;
               },
               validate_train, run_train});

  r.push_back({"dim_sweep", mlp_defaults({{"dims", {100, 150, 200}}, {"sigmas", {0.0, 0.1, 0.2}}}),
               [](const json& p) {
                 std::vector<json> pts;
                 for (int d : list<int>(p, "dims"))
                   for (double s : list<double>(p, "sigmas")) {
                     json pt = train_point(p);
                     pt["d"] = d;
                     pt["init"] = "perturbed:" + fmt(s);
                     pt["steps"] = steps_from_samples(p);
                     pts.push_back(pt);
                   }
                 return pts;
               },
               validate_train, run_train});

  // Leap polynomial under several losses, with the initial alignment.
  r.push_back({"loss_compare",
               mlp_defaults({{"losses", {"l1", "squared"}},
                             {"init", "gaussian"},
                             {"target", "leap"},
                             {"gal_theta", 32},
                             {"gal_inner", 512},
                             {"train_samples", 640000}}),
               [](const json& p) {
                 std::vector<json> pts;
                 for (const auto& loss : list<std::string>(p, "losses")) {
                   json pt = train_point(p);
                   pt["loss"] = loss;
                   pt["steps"] = steps_from_samples(p);
                   pts.push_back(pt);
                 }
                 return pts;
               },
               validate_train, run_train});

  // Two-layer net, output layer only, correlation loss, width in units of d^2.
  r.push_back({"width_sweep",
               {{"dims", {8, 10, 12}},
                {"width_factors", {1, 2, 4}},
                {"activation", "crelu1"},
                {"init", "rademacher"},
                {"lr", 1.0},
                {"batch", 1024},
                {"steps", 200},
                {"eval", "enumerate"},
                {"eval_points", 4}},
               [](const json& p) {
                 std::vector<json> pts;
                 for (int d : list<int>(p, "dims"))
                   for (double f : list<double>(p, "width_factors")) {
                     json pt = train_point(p);
                     pt["d"] = d;
                     pt["hidden"] = {static_cast<int>(std::lround(f * d * d))};
                     pt["loss"] = "correlation";
                     pt["train_layers"] = "output_only";
                     pt["zero_output"] = true;
                     pts.push_back(pt);
                   }
                 return pts;
               },
               validate_train, run_train});

  // Monte-Carlo alignment of one neuron at initialization.
  r.push_back({"gal_curves",
               {{"dims", {4, 6, 8, 10, 12, 14, 16, 18, 20}},
                {"inits", {"rademacher", "gaussian", "perturbed:0.3", "perturbed:0.8"}},
                {"activation", "relu"},
                {"loss", "hinge:1"},
                {"n_theta", 200},
                {"n_inner", 2048}},
               [](const json& p) {
                 std::vector<json> pts;
                 for (int d : list<int>(p, "dims"))
                   for (const auto& init : list<std::string>(p, "inits"))
                     pts.push_back({{"d", d},
                                    {"init", init},
                                    {"activation", str(p, "activation")},
                                    {"loss", str(p, "loss")},
                                    {"n_theta", integer(p, "n_theta", 2)},
                                    {"n_inner", integer(p, "n_inner", 2)}});
                 return pts;
               },
               [](const json& pt) { neuron_setup(pt); },
               [](const json& pt, std::uint64_t stream) {
                 const NeuronSetup s = neuron_setup(pt);
                 GalMcOptions opt;
                 opt.coordinate = s.coordinate;
                 return gal_records(gal_mc(s.spec, s.init, s.loss, TargetSpec::full_parity(s.spec.input_dim),
                                           s.n_theta, s.n_inner, stream, opt),
                                    0);
               }});

  // Alignment after t steps of random-label training.
  r.push_back({"junk_flow_gal",
               {{"dims", {6, 10, 14, 18}},
                {"init", "gaussian"},
                {"activation", "relu"},
                {"loss", "hinge:1"},
                {"junk_steps", {0, 2, 5}},
                {"junk_gamma", 1.0},
                {"junk_tau", 0.0},
                {"junk_batch", 64},
                {"n_theta", 200},
                {"n_inner", 2048}},
               [](const json& p) {
                 std::vector<json> pts;
                 for (int d : list<int>(p, "dims"))
                   for (int t : list<int>(p, "junk_steps"))
                     pts.push_back({{"d", d},
                                    {"init", str(p, "init")},
                                    {"activation", str(p, "activation")},
                                    {"loss", str(p, "loss")},
                                    {"junk_steps", t},
                                    {"junk_gamma", num(p, "junk_gamma")},
                                    {"junk_tau", num(p, "junk_tau")},
                                    {"junk_batch", integer(p, "junk_batch", 1)},
                                    {"n_theta", integer(p, "n_theta", 2)},
                                    {"n_inner", integer(p, "n_inner", 2)}});
                 return pts;
               },
               [](const json& pt) {
                 neuron_setup(pt);
                 integer(pt, "junk_steps", 0);
                 if (num(pt, "junk_tau") < 0) throw ParamError("junk_tau", "'junk_tau' must be >= 0");
               },
               [](const json& pt, std::uint64_t stream) {
                 const NeuronSetup s = neuron_setup(pt);
                 GalMcOptions opt;
                 opt.coordinate = s.coordinate;
                 opt.junk = {integer(pt, "junk_steps", 0), num(pt, "junk_gamma"), num(pt, "junk_tau"),
                             static_cast<std::size_t>(integer(pt, "junk_batch", 1))};
                 return gal_records(gal_mc(s.spec, s.init, s.loss, TargetSpec::full_parity(s.spec.input_dim),
                                           s.n_theta, s.n_inner, stream, opt),
                                    opt.junk.steps);
               }});

  // Exact alignments; the seed column only repeats the deterministic value.
  r.push_back({"gal_exact_scan",
               {{"kind", "gaussian"},
                {"dims", {10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32, 34, 36, 38, 40}},
                {"a", 0},
                {"sigma_b", 0.0},
                {"n", 1},
                {"mus", {0.1, 0.3}}},
               [](const json& p) {
                 std::vector<json> pts;
                 const std::string kind = str(p, "kind");
                 for (int d : list<int>(p, "dims")) {
                   if (kind == "gaussian") {
                     pts.push_back({{"kind", kind},
                                    {"d", d},
                                    {"a", integer(p, "a", 0)},
                                    {"sigma_b", num(p, "sigma_b")},
                                    {"n", integer(p, "n", 1)}});
                   } else if (kind == "perturbed") {
                     for (double mu : list<double>(p, "mus")) pts.push_back({{"kind", kind}, {"d", d}, {"mu", mu}});
                   } else {
                     throw ParamError("kind", "'kind' must be gaussian or perturbed");
                   }
                 }
                 return pts;
               },
               [](const json& pt) {
                 const int d = static_cast<int>(integer(pt, "d", 2));
                 if (str(pt, "kind") == "gaussian") {
                   const auto a = integer(pt, "a", 0);
                   if (2 * a > d) throw ParamError("a", "'a' must be <= d/2");
                   if (d > 2000) throw ParamError("dims", "gaussian scan needs d <= 2000");
                   if (num(pt, "sigma_b") < 0) throw ParamError("sigma_b", "'sigma_b' must be >= 0");
                 } else {
                   if (d > 200) throw ResourceLimitError("perturbed GAL: exact evaluation limited to d <= 200");
                   if (num(pt, "mu") < 0) throw ParamError("mus", "mus must be >= 0");
                 }
               },
               [](const json& pt, std::uint64_t) {
                 std::vector<Record> out;
                 const int d = static_cast<int>(integer(pt, "d", 2));
                 if (str(pt, "kind") == "gaussian") {
                   const GaussianGalQuery q{d, static_cast<int>(integer(pt, "a", 0)), num(pt, "sigma_b"),
                                            static_cast<int>(integer(pt, "n", 1))};
                   const LogValue hid = gal_gaussian_coord_log(q, GalCoord::hidden(1));
                   out.push_back({"", "", 0, 0, "gal_coord_hidden", hid.value()});
                   out.push_back({"", "", 0, 0, "log_gal_coord_hidden", hid.sign > 0 ? hid.log_abs : NAN});
                   out.push_back({"", "", 0, 0, "gal_coord_bias", gal_gaussian_coord(q, GalCoord::bias())});
                   out.push_back({"", "", 0, 0, "gal_coord_output", gal_gaussian_coord(q, GalCoord::output())});
                   out.push_back({"", "", 0, 0, "gal_total", gal_gaussian_total(q)});
                 } else {
                   const PerturbedGalQuery q{d, num(pt, "mu")};
                   out.push_back({"", "", 0, 0, "gal_hidden", gal_perturbed_exact(q, GalLayer::hidden)});
                   out.push_back({"", "", 0, 0, "gal_output", gal_perturbed_exact(q, GalLayer::output)});
                 }
                 return out;
               }});

  // One correlation-loss GD step in closed form, width n = scale * d^power.
  r.push_back({"one_step_demo",
               {{"dims", {8, 10, 12}},
                {"a", 0},
                {"activation", "relu"},
                {"bias", "parity"},
                {"width_power", 4.0},
                {"width_scale", 1.0},
                {"tau", 0.0},
                {"eval_samples", 10000}},
               [](const json& p) {
                 std::vector<json> pts;
                 for (int d : list<int>(p, "dims")) {
                   const double n = num(p, "width_scale") * std::pow(d, num(p, "width_power"));
                   pts.push_back({{"d", d},
                                  {"a", integer(p, "a", 0)},
                                  {"activation", str(p, "activation")},
                                  {"bias", str(p, "bias")},
                                  {"n", static_cast<std::int64_t>(std::llround(n))},
                                  {"tau", num(p, "tau")},
                                  {"eval_samples", integer(p, "eval_samples", 1)}});
                 }
                 return pts;
               },
               [](const json& pt) {
                 const auto d = integer(pt, "d", 2);
                 const auto a = integer(pt, "a", 0);
                 if (d - a < 2) throw ParamError("a", "need d - a >= 2");
                 if (integer(pt, "n", 1) > 50'000'000 / d) throw ResourceLimitError("one_step_demo: width too large");
                 parse_as("activation", [&] { return Activation::parse(str(pt, "activation")); });
                 parse_as("bias", [&] { return BiasScheme::parse(str(pt, "bias")); });
                 if (num(pt, "tau") < 0) throw ParamError("tau", "'tau' must be >= 0");
               },
               [](const json& pt, std::uint64_t stream) {
                 const int d = static_cast<int>(integer(pt, "d", 2));
                 const int a = static_cast<int>(integer(pt, "a", 0));
                 const NetParams net = one_step_gd_closed_form(
                     d, a, static_cast<int>(integer(pt, "n", 1)), 1.0, BiasScheme::parse(str(pt, "bias")),
                     Activation::parse(str(pt, "activation")), stream, num(pt, "tau"));
                 EvalSpec eval{d <= kMaxEnumerateDim, static_cast<std::size_t>(integer(pt, "eval_samples", 1)),
                               derive(stream, 2)};
                 const AccuracyReport rep = eval_accuracy(net, TargetSpec::co_degree(d, a), eval);
                 return std::vector<Record>{{"", "", 0, 1, "test_accuracy", rep.accuracy},
                                            {"", "", 0, 1, "zero_outputs", static_cast<double>(rep.zero_outputs)}};
               }});
  return r;
}

}  // namespace

const std::vector<RecipeDef>& recipes() {
  static const std::vector<RecipeDef> all = build();
  return all;
}

const RecipeDef* find_recipe(const std::string& name) {
  for (const auto& r : recipes())
    if (r.name == name) return &r;
  return nullptr;
}

}  // namespace lab
