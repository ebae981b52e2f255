// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--only NAME]... [--sigma-steps N] [--list]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.hpp"
#include "parity/alignment.hpp"
#include "parity/exactcomb.hpp"
#include "parity/gaussiankit.hpp"
#include "parity/nets.hpp"

using namespace parity;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<Activation> kDeltaActs = {Activation::relu(), Activation::clipped(5)};

Outcome delta_correctness() {
  double worst = 0.0;
  int checked = 0;
  for (int d = 2; d <= 14; ++d)
    for (int a = 0; a <= 2; ++a) {
      if (d - a < 2) continue;
      for (double b : {-2.0, -1.0, 0.0, a + 2.0, a + 2.1})
        for (const auto& act : kDeltaActs) {
          const DeltaQuery q{d, a, b, act};
          worst = std::max(worst, std::fabs(delta(q) - delta_oracle(q, OracleMode::enumerate)));
          ++checked;
        }
    }
  return {worst <= 1e-12, fmt("%d queries, max |diff| = %.3g (tol 1e-12)", checked, worst)};
}

Outcome delta_asymptotics() {
  std::vector<double> ds, v0, v1, v2;
  for (int d = 20; d <= 400; ++d) {
    ds.push_back(d);
    v0.push_back(std::fabs(delta_log({d, 0, parity_bias(d), Activation::relu()}).value()));
    const double b = d % 2 ? -1.0 : -2.0;
    v1.push_back(std::fabs(delta_log({d, 1, b, Activation::relu()}).value()));
    v2.push_back(std::fabs(delta_log({d, 2, b, Activation::relu()}).value()));
  }
  const double s0 = oracle::loglog_slope(ds, v0);
  const double s1 = oracle::loglog_slope(ds, v1);
  const double s2 = oracle::loglog_slope(ds, v2);
  const bool ok = std::fabs(s0 + 0.5) <= 0.1 && std::fabs(s1 + 1.5) <= 0.15 && std::fabs(s2 + 1.5) <= 0.15;
  return {ok, fmt("slopes a=0: %.4f (want -0.5+-0.1), a=1: %.4f, a=2: %.4f (want -1.5+-0.15)", s0, s1, s2)};
}

Outcome alt_sum_identities() {
  auto sgn = [](int k) { return k % 2 ? -1 : 1; };
  long checked = 0, bad = 0;
  for (int d = 2; d <= 40; ++d)
    for (int c = 2; c <= d; ++c) {
      bad += alt_binom_sum(d, c, d, false) != sgn(c) * binom(d - 1, c - 1);
      bad += alt_binom_sum(d, c, d, true) != sgn(c) * d * binom(d - 2, c - 2);
      checked += 2;
      for (int cp = c; cp <= d; ++cp) {
        bad += alt_binom_sum(d, c, cp, false) != sgn(c) * binom(d - 1, c - 1) + sgn(cp) * binom(d - 1, cp);
        bad += alt_binom_sum(d, c, cp, true) !=
               sgn(c) * d * binom(d - 2, c - 2) + sgn(cp) * d * binom(d - 2, cp - 1);
        checked += 2;
      }
    }
  return {bad == 0, fmt("%ld identities checked, %ld mismatches", checked, bad)};
}

Outcome one_step_learning() {
  const int d = 12;
  const TargetSpec target = TargetSpec::full_parity(d);
  auto count = [&](const Activation& act, int n) {
    int perfect = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const NetParams net = one_step_gd_closed_form(d, 0, n, 1.0, BiasScheme::parity(), act, seed, 0.0);
      perfect += eval_accuracy(net, target, {true, 0, 0}).accuracy == 1.0;
    }
    return perfect;
  };
  const int relu = count(Activation::relu(), d * d * d * d);
  const int clipped = count(Activation::clipped(5), 50 * d * d);
  return {relu >= 9 && clipped >= 9,
          fmt("perfect seeds: relu n=d^4 %d/10, crelu5 n=50d^2 %d/10 (need >= 9)", relu, clipped)};
}

Outcome bivariate_kernels() {
  double worst_cdf = 0.0, worst_relu = 0.0, worst_arcsine = 0.0;
  int points = 0;
  for (double a : {-1.5, -0.4, 0.0, 0.7, 1.8})
    for (double b : {-1.2, 0.0, 0.3, 1.5})
      for (double rho : {-0.95, -0.7, -0.3, 0.0, 0.4, 0.8, 0.95}) {
        worst_cdf = std::max(worst_cdf, std::fabs(lambda_cdf({a, b, rho}) - oracle::bvn_cdf_2d(a, b, rho)));
        worst_relu = std::max(worst_relu, std::fabs(relu_cross_moment({a, b, rho}) - oracle::relu_moment_2d(a, b, rho)));
        ++points;
      }
  for (int i = -100; i <= 100; ++i) {
    const double rho = i / 100.0;
    const double arcsine = 0.25 + std::asin(rho) / (2.0 * M_PI);
    worst_arcsine = std::max(worst_arcsine, std::fabs(lambda_cdf({0.0, 0.0, rho}) - arcsine));
  }
  const bool ok = worst_cdf <= 1e-8 && worst_relu <= 1e-8 && worst_arcsine <= 1e-10;
  return {ok, fmt("%d grid points: lambda_cdf %.3g, relu_cross_moment %.3g (tol 1e-8); arcsine %.3g (tol 1e-10)",
                  points, worst_cdf, worst_relu, worst_arcsine)};
}

Outcome gaussian_gal() {
  int cases = 0, outside = 0;
  double worst_z = 0.0;
  std::uint64_t seed = 7000;
  for (int d : {8, 12})
    for (int a : {0, d / 2})
      for (double sb : {0.0, 0.5}) {
        std::vector<GalCoord> coords = {GalCoord::hidden(1), GalCoord::bias(), GalCoord::output()};
        if (a > 0) coords.push_back(GalCoord::hidden(d));
        const GaussianGalQuery q{d, a, sb, 1};
        for (const auto& c : coords) {
          const double exact = gal_gaussian_coord(q, c);
          const auto mc = oracle::gaussian_coord_mc(q, c, 1000000, ++seed);
          const double z = std::fabs(exact - mc.mean) / mc.se;
          worst_z = std::max(worst_z, z);
          outside += z > 3.0;
          ++cases;
        }
      }
  // Decay in d at a = 0, sigma_b = 0 for the hidden and output coordinates and
  // the total. The bias coordinate cancels exactly at even d.
  bool monotone = true, bias_zero = true;
  double worst_slope = -1e300;
  for (int series = 0; series < 3; ++series) {
    std::vector<double> ds, logs;
    for (int d = 10; d <= 40; d += 2) {
      const GaussianGalQuery q{d, 0, 0.0, 1};
      ds.push_back(d);
      if (series == 0) logs.push_back(gal_gaussian_coord_log(q, GalCoord::hidden(1)).log_abs);
      if (series == 1) logs.push_back(gal_gaussian_coord_log(q, GalCoord::output()).log_abs);
      if (series == 2) logs.push_back(std::log(gal_gaussian_total(q)));
      if (series == 0) bias_zero = bias_zero && gal_gaussian_coord_log(q, GalCoord::bias()).sign == 0;
      if (logs.size() > 1 && !(logs.back() < logs[logs.size() - 2])) monotone = false;
    }
    worst_slope = std::max(worst_slope, oracle::linear_slope(ds, logs));
  }
  const bool ok = outside == 0 && monotone && worst_slope < -0.05 && bias_zero;
  return {ok, fmt("%d MC comparisons, %d outside 3 SE (max %.2f SE); hidden/output/total log strictly "
                  "decreasing: %s, max fitted slope %.4f (need < -0.05); bias coordinate exactly 0: %s",
                  cases, outside, worst_z, monotone ? "yes" : "no", worst_slope, bias_zero ? "yes" : "no")};
}

Outcome perturbed_gal() {
  double worst = 0.0;
  for (double mu : {0.0, 0.1, 0.5})
    for (GalLayer layer : {GalLayer::hidden, GalLayer::output}) {
      const double exact = gal_perturbed_exact({8, mu}, layer);
      worst = std::max(worst, std::fabs(exact - oracle::perturbed_exhaustive(8, mu, layer)));
    }
  return {worst <= 1e-10, fmt("d=8, 6 cases, max |diff| = %.3g (tol 1e-10)", worst)};
}

Outcome alternating_decay() {
  std::string detail;
  bool ok = true;
  for (GaussKernel kernel : {GaussKernel::step, GaussKernel::relu}) {
    std::vector<double> ds, logs;
    double c_bound = 1e300;
    int zeros = 0;
    for (int d = 50; d <= 400; d += 5) {
      const LogValue v = alternating_expectation_log({d, 0.5, 0.0}, kernel);
      if (v.sign == 0 || !std::isfinite(v.log_abs)) {
        ++zeros;  // exact cancellation satisfies any bound
        continue;
      }
      ds.push_back(d);
      logs.push_back(v.log_abs);
      c_bound = std::min(c_bound, -v.log_abs / d);
    }
    const double slope = ds.size() >= 2 ? oracle::linear_slope(ds, logs) : 0.0;
    const bool k_ok = ds.size() >= 2 && c_bound > 0.0 && slope < 0.0;
    ok = ok && k_ok;
    detail += fmt("%s: c=%.4f (largest c with |E| <= exp(-c d) for all d), fitted log-slope %.4f, %d exact zeros; ",
                  kernel == GaussKernel::step ? "step" : "relu", c_bound, slope, zeros);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome rescaling() {
  NetParams net = make_net({16, {24, 12}, Activation::relu(), true, std::nullopt}, InitSpec::gaussian(), 31);
  for (std::size_t l = 1; l < net.layers.size(); ++l) net.layers[l].b.setZero();
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> unif(1.1, 3.0);
  std::vector<double> C(net.layers.size());
  for (double& c : C) c = unif(rng);
  const RescaleReport rep = rescale_check(net, C, 100, 33);
  const bool ok = rep.points == 100 && rep.max_output_rel_error <= 1e-9;
  return {ok, fmt("C=(%.3f, %.3f, %.3f), max output rel error %.3g (tol 1e-9); gradient ratio rel error %.3g",
                  C[0], C[1], C[2], rep.max_output_rel_error, rep.max_grad_ratio_rel_error)};
}

Outcome junk_flow() {
  const NetParams theta = make_net({99, {1000}, Activation::relu(), true, std::nullopt}, InitSpec::gaussian(), 41);
  const double gamma = 0.05, tau = 0.3;
  const std::int64_t T = 100;
  const Vec diff = junk_flow_run(theta, LossKind::correlation(), gamma, tau, T, 64, 42).flatten() - theta.flatten();
  const double n = static_cast<double>(diff.size());
  const double mean = diff.sum() / n;
  const double var = (diff.array() - mean).square().sum() / (n - 1);
  const double expect = T * gamma * gamma * tau * tau;
  const double rel = std::fabs(var / expect - 1.0);
  return {diff.size() >= 100000 && rel <= 0.05,
          fmt("%ld coordinates, variance %.5g vs T gamma^2 tau^2 = %.5g, rel diff %.4f (tol 0.05)",
              static_cast<long>(diff.size()), var, expect, rel)};
}

std::int64_t g_sigma_steps = 120000;  // 7.68M samples, the sigma_sweep default

Outcome sigma_separation() {
  const int d = 50;
  const TargetSpec target = TargetSpec::full_parity(d);
  const NetworkSpec spec{d, {512, 512, 64}, Activation::relu(), true, std::nullopt};
  auto final_accuracy = [&](double sigma, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.gamma = 0.01;
    cfg.batch = 64;
    cfg.steps = g_sigma_steps;
    cfg.seed = seed;
    cfg.precision = TrainConfig::Precision::f32;
    cfg.eval.samples = 1024;
    cfg.eval.seed = seed + 100;
    const NetParams init = make_net(spec, InitSpec::perturbed(sigma), seed);
    const NetParams trained = noisy_sgd(init, target, cfg, LossKind::hinge(1.0)).first;
    return eval_accuracy(trained, target, {false, 20000, seed + 200}).accuracy;
  };
  bool ok = true;
  std::string detail = fmt("%lld samples per run;", static_cast<long long>(g_sigma_steps * 64));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const double a0 = final_accuracy(0.0, seed);
    const double a1 = final_accuracy(1.0, seed);
    ok = ok && a0 - a1 >= 0.4;
    detail += fmt(" seed %d: acc(0)=%.4f acc(1)=%.4f gap=%.4f;", static_cast<int>(seed), a0, a1, a0 - a1);
    std::fflush(stdout);
  }
  detail += " need gap >= 0.4 for every seed";
  return {ok, detail};
}

Outcome hinge_updates() {
  const int d = 10, n = d * d * d * d;
  const TargetSpec target = TargetSpec::full_parity(d);
  HingeConfig cfg;
  cfg.gamma = std::pow(d, -3.5);
  cfg.beta = d * d * n * cfg.gamma;
  cfg.max_steps = 2000000;
  cfg.patience = 20000;
  const std::int64_t bound = 100LL * d * d * d;
  int good = 0;
  std::int64_t most = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const NetParams init = rademacher_two_layer(d, n, 0, BiasScheme::parity(), Activation::relu(), seed);
    cfg.seed = seed + 50;
    const HingeResult r = hinge_sgd_count_updates(init, target, cfg);
    const double acc = eval_accuracy(r.net, target, {true, 0, 0}).accuracy;
    most = std::max(most, r.nonzero_updates);
    good += r.converged && r.nonzero_updates < bound && acc == 1.0;
  }
  return {good >= 4, fmt("gamma=d^-3.5, beta=d^2 n gamma=%.3g; %d/5 seeds converged with accuracy 1.0 and "
                         "< %lld updates (max updates %lld)",
                         cfg.beta, good, static_cast<long long>(bound), static_cast<long long>(most))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parity acceptance suite"};
  std::vector<std::string> only;
  bool list = false;
  app.add_option("--only", only, "run only the named criteria");
  app.add_option("--sigma-steps", g_sigma_steps, "SGD steps per run of sigma_separation (batch 64)")->check(CLI::PositiveNumber);
  app.add_flag("--list", list, "print criterion names and exit");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {"delta_correctness", 60, delta_correctness},
      {"delta_asymptotics", 60, delta_asymptotics},
      {"alt_sum_identities", 10, alt_sum_identities},
      {"one_step_learning", 300, one_step_learning},
      {"bivariate_kernels", 60, bivariate_kernels},
      {"gaussian_gal", 300, gaussian_gal},
      {"perturbed_gal", 120, perturbed_gal},
      {"alternating_decay", 60, alternating_decay},
      {"rescaling", 10, rescaling},
      {"junk_flow", 30, junk_flow},
      {"sigma_separation", 1800, sigma_separation},
      {"hinge_updates", 600, hinge_updates},
  };
  if (list) {
    for (const auto& c : criteria) std::printf("%s\n", c.name.c_str());
    return 0;
  }
  for (const auto& name : only) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.name == name; })) {
      std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
      return 2;
    }
  }

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = sec <= c.budget_seconds;
    if (!in_time) out.detail += "; over runtime budget";
    const bool pass = out.pass && in_time;
    failed += !pass;
    ++ran;
    std::printf("%s %-18s [%7.1fs / %4.0fs] %s\n", pass ? "PASS" : "FAIL", c.name.c_str(), sec, c.budget_seconds,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
