#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "lab.hpp"
#include "parity/rng.hpp"
#include "recipes.hpp"

#ifndef PARITY_LAB_VERSION
#define PARITY_LAB_VERSION "unknown"
#endif

namespace lab {
namespace {

std::string iso8601_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunResult run_experiment(const LabConfig& cfg) {
  const RecipeDef* recipe = find_recipe(cfg.recipe);
  if (!recipe) throw ConfigError(cfg.source, 0, "unknown recipe '" + cfg.recipe + "'");
  const auto started = std::chrono::steady_clock::now();
  const std::string started_iso = iso8601_now();

  const std::vector<json> points = recipe->expand(cfg.params);
  std::vector<std::string> hashes;
  json point_map = json::object();
  for (const auto& p : points) {
    recipe->validate(p);
    hashes.push_back(params_hash(p));
    point_map[hashes.back()] = p;
  }

  std::vector<Job> jobs;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (auto seed : cfg.seeds) {
      const std::string key = cfg.recipe + "/" + hashes[i] + "/" + std::to_string(seed);
      jobs.push_back({i, seed, parity::hash_string(key)});
    }

  std::vector<std::vector<Record>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      try {
        auto recs = recipe->run(points[jobs[j].point], jobs[j].stream);
        for (auto& r : recs) {
          r.recipe = cfg.recipe;
          r.params_hash = hashes[jobs[j].point];
          r.seed = jobs[j].seed;
        }
        results[j] = std::move(recs);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  unsigned n_workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  RunResult out;
  for (auto& r : results) out.records.insert(out.records.end(), r.begin(), r.end());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.manifest = {{"schema", kSchema},
                  {"started", started_iso},
                  {"code_version", PARITY_LAB_VERSION},
                  {"config", resolved_config(cfg)},
                  {"param_points", point_map},
                  {"jobs", jobs.size()},
                  {"records", out.records.size()},
                  {"wall_seconds", wall}};
  return out;
}

RunResult run_to_directory(const LabConfig& cfg) {
  RunResult res = run_experiment(cfg);
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "records.csv");
    write_csv(csv, res.records);
    if (!csv) throw std::runtime_error("failed to write " + (dir / "records.csv").string());
  }
  std::ofstream man(dir / "manifest.json");
  man << res.manifest.dump(2) << '\n';
  if (!man) throw std::runtime_error("failed to write " + (dir / "manifest.json").string());
  return res;
}

}  // namespace lab
