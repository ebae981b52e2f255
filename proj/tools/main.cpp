// parity-lab: experiment runner and one-shot evaluators.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lab/lab.hpp"
#include "parity/alignment.hpp"
#include "parity/errors.hpp"
#include "parity/exactcomb.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitResource = 3;

void kv(const char* key, double v) { std::printf("%s=%.17g\n", key, v); }
void kv(const char* key, const std::string& v) { std::printf("%s=%s\n", key, v.c_str()); }

int cmd_run(const std::string& path, unsigned workers, const std::string& out_dir) {
  lab::LabConfig cfg = lab::load_config(path);
  if (workers) cfg.workers = workers;
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const auto res = lab::run_to_directory(cfg);
  kv("records", static_cast<double>(res.records.size()));
  kv("output_dir", cfg.output_dir);
  kv("wall_seconds", res.manifest["wall_seconds"].get<double>());
  return 0;
}

int cmd_report(const std::string& dir) {
  const std::filesystem::path base(dir);
  std::ifstream csv(base / "records.csv");
  if (!csv) throw lab::CsvError("cannot open " + (base / "records.csv").string());
  const auto records = lab::read_csv(csv);
  lab::json points = lab::json::object();
  std::ifstream man(base / "manifest.json");
  if (man) {
    try {
      points = lab::json::parse(man).value("param_points", lab::json::object());
    } catch (const lab::json::exception&) {
      std::cerr << "warning: unreadable manifest.json, parameters omitted\n";
    }
  }
  lab::print_report(std::cout, lab::summarize(records), points);
  return 0;
}

int cmd_delta(int d, int a, double b, const std::string& act, const std::string& method) {
  const parity::DeltaQuery q{d, a, b, parity::Activation::parse(act)};
  if (method == "exact") {
    kv("delta", parity::delta(q));
  } else if (method == "log") {
    const parity::LogValue v = parity::delta_log(q);
    kv("sign", v.sign);
    kv("log_abs", v.log_abs);
    kv("delta", v.value());
  } else if (method == "enumerate") {
    kv("delta", parity::delta_oracle(q, parity::OracleMode::enumerate));
  } else {
    kv("delta", parity::delta_oracle(q, parity::OracleMode::binomial));
  }
  kv("method", method);
  return 0;
}

parity::GalCoord parse_coord(const std::string& s) {
  if (s == "bias") return parity::GalCoord::bias();
  if (s == "output") return parity::GalCoord::output();
  if (s.rfind("hidden:", 0) == 0) return parity::GalCoord::hidden(std::stoi(s.substr(7)));
  throw std::invalid_argument("coordinate must be hidden:<j>, bias, output or total");
}

struct GalExactArgs {
  std::string kind = "gaussian";
  int d = 10, a = 0, n = 1;
  double sigma_b = 0.0, mu = 0.0;
  std::string coord = "total", layer = "hidden";
};

int cmd_gal_exact(const GalExactArgs& g) {
  if (g.kind == "gaussian") {
    const parity::GaussianGalQuery q{g.d, g.a, g.sigma_b, g.n};
    if (g.coord == "total") {
      kv("value", parity::gal_gaussian_total(q));
    } else {
      const parity::LogValue v = parity::gal_gaussian_coord_log(q, parse_coord(g.coord));
      kv("value", v.value());
      kv("log_value", v.sign > 0 ? v.log_abs : NAN);
    }
  } else if (g.kind == "perturbed") {
    const auto layer = g.layer == "output" ? parity::GalLayer::output : parity::GalLayer::hidden;
    kv("value", parity::gal_perturbed_exact({g.d, g.mu}, layer));
  } else {
    throw std::invalid_argument("--kind must be gaussian or perturbed");
  }
  kv("method", "exact");
  kv("std_err", 0.0);
  return 0;
}

struct GalMcArgs {
  int d = 10;
  std::vector<int> hidden;
  std::string act = "relu", init = "gaussian", loss = "correlation", target = "full";
  bool bias = false;
  std::size_t n_theta = 200, n_inner = 2048;
  std::uint64_t seed = 0;
  long long coordinate = -1;
  std::int64_t junk_steps = 0;
  double junk_gamma = 1.0, junk_tau = 0.0;
  std::size_t junk_batch = 64;
};

int cmd_gal_mc(const GalMcArgs& g) {
  const auto act = parity::Activation::parse(g.act);
  parity::NetworkSpec spec{g.d, g.hidden, act, g.bias, std::nullopt};
  if (g.hidden.empty()) spec.output_act = act;  // a single neuron act(w.x + b)
  parity::TargetSpec target = parity::TargetSpec::full_parity(g.d);
  if (g.target == "leap") {
    target = parity::TargetSpec::leap_poly();
  } else if (g.target.rfind("parity:", 0) == 0) {
    std::vector<int> support(std::stoi(g.target.substr(7)));
    for (std::size_t i = 0; i < support.size(); ++i) support[i] = static_cast<int>(i);
    target = parity::TargetSpec::parity(support);
  } else if (g.target != "full") {
    throw std::invalid_argument("--target must be full, leap or parity:<k>");
  }
  parity::GalMcOptions opt;
  if (g.coordinate >= 0) opt.coordinate = static_cast<std::size_t>(g.coordinate);
  opt.junk = {g.junk_steps, g.junk_gamma, g.junk_tau, g.junk_batch};
  const auto r = parity::gal_mc(spec, parity::InitSpec::parse(g.init), parity::LossKind::parse(g.loss), target,
                                g.n_theta, g.n_inner, g.seed, opt);
  kv("value", r.value);
  kv("estimate", r.estimate);
  kv("std_err", r.std_err);
  kv("method", "monte_carlo");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parity-lab: parity-learning experiments and exact evaluators"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  unsigned workers = 0;
  auto* run = app.add_subcommand("run", "Run a recipe config, writing records.csv and manifest.json");
  run->add_option("config", config_path, "Config JSON")->required();
  run->add_option("--workers", workers, "Worker threads (default: config or hardware)");
  run->add_option("--output-dir", out_dir, "Override output_dir");

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Mean and 95% CI across seeds for a run directory");
  report->add_option("dir", report_dir, "Run directory")->required();

  int dd = 10, da = 0;
  double db = 0.0;
  std::string dact = "relu", dmethod = "exact";
  auto* delta = app.add_subcommand("delta", "Delta^(a)_{d,b} for relu or clipped relu");
  delta->add_option("--d", dd)->required();
  delta->add_option("--a", da);
  delta->add_option("--b", db);
  delta->add_option("--act", dact, "relu, crelu<clip>, threshold (oracle methods only)");
  delta->add_option("--method", dmethod)->check(CLI::IsMember({"exact", "log", "enumerate", "binomial"}));

  GalExactArgs ge;
  auto* gal_exact = app.add_subcommand("gal-exact", "Exact gradient alignment");
  gal_exact->add_option("--kind", ge.kind)->check(CLI::IsMember({"gaussian", "perturbed"}));
  gal_exact->add_option("--d", ge.d)->required();
  gal_exact->add_option("--a", ge.a);
  gal_exact->add_option("--n", ge.n);
  gal_exact->add_option("--sigma-b", ge.sigma_b);
  gal_exact->add_option("--coord", ge.coord, "hidden:<j>, bias, output or total");
  gal_exact->add_option("--mu", ge.mu);
  gal_exact->add_option("--layer", ge.layer)->check(CLI::IsMember({"hidden", "output"}));

  GalMcArgs gm;
  auto* gal_mc = app.add_subcommand("gal-mc", "Monte-Carlo gradient alignment");
  gal_mc->add_option("--d", gm.d)->required();
  gal_mc->add_option("--hidden", gm.hidden, "Hidden widths; none gives a single neuron")->delimiter(',');
  gal_mc->add_option("--act", gm.act);
  gal_mc->add_option("--init", gm.init);
  gal_mc->add_option("--loss", gm.loss);
  gal_mc->add_option("--target", gm.target);
  gal_mc->add_flag("--bias", gm.bias);
  gal_mc->add_option("--n-theta", gm.n_theta);
  gal_mc->add_option("--n-inner", gm.n_inner);
  gal_mc->add_option("--seed", gm.seed);
  gal_mc->add_option("--coordinate", gm.coordinate, "Flattened parameter index");
  gal_mc->add_option("--junk-steps", gm.junk_steps);
  gal_mc->add_option("--junk-gamma", gm.junk_gamma);
  gal_mc->add_option("--junk-tau", gm.junk_tau);
  gal_mc->add_option("--junk-batch", gm.junk_batch);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, workers, out_dir);
    if (*report) return cmd_report(report_dir);
    if (*delta) return cmd_delta(dd, da, db, dact, dmethod);
    if (*gal_exact) return cmd_gal_exact(ge);
    if (*gal_mc) return cmd_gal_mc(gm);
  } catch (const lab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lab::CsvError& e) {
    std::cerr << "records error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const parity::ResourceLimitError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "out of range: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
