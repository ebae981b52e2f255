#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace lab {

using json = nlohmann::ordered_json;

inline constexpr const char* kCsvHeader = "recipe,params_hash,seed,step,metric,value";
inline constexpr const char* kSchema = "parity-lab/1";

// One row of records.csv.
struct Record {
  std::string recipe;
  std::string params_hash;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  std::string metric;
  double value = 0.0;

  bool operator==(const Record&) const = default;
};

// Values use %.17g; NaN is written as "nan".
std::string format_record(const Record& r);
Record parse_record(const std::string& line);
void write_csv(std::ostream& out, const std::vector<Record>& records);
// Throws CsvError on a missing header or a malformed row.
std::vector<Record> read_csv(std::istream& in);

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration. `line` is 1-based in the config file, 0 if unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, int line, const std::string& msg);
  int line() const { return line_; }

 private:
  int line_;
};

struct LabConfig {
  std::string recipe;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "runs/out";
  unsigned workers = 0;  // 0 picks the hardware concurrency
  json params;           // recipe parameters with defaults filled in
  std::string source;    // path of the config file, for messages
};

LabConfig parse_config(const std::string& text, const std::string& source = "<config>");
LabConfig load_config(const std::filesystem::path& path);
json resolved_config(const LabConfig& cfg);

std::vector<std::string> recipe_names();
json recipe_defaults(const std::string& recipe);

// Hex FNV-1a of the compact JSON dump of a parameter point.
std::string params_hash(const json& point);

struct Job {
  std::size_t point = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // derived from (seed, recipe, params hash)
};

struct RunResult {
  std::vector<Record> records;
  json manifest;
};

// Runs every (point, seed) job of the recipe. Records come back in job order,
// so the output does not depend on the worker count.
RunResult run_experiment(const LabConfig& cfg);
// run_experiment plus records.csv and manifest.json in cfg.output_dir.
RunResult run_to_directory(const LabConfig& cfg);

struct SummaryRow {
  std::string recipe;
  std::string params_hash;
  std::string metric;
  std::size_t seeds = 0;
  double mean = 0.0;
  std::optional<double> ci_half;  // 1.96 * SE; empty with one seed
};

// For every (recipe, params, metric) take the last step of each seed and
// summarize across seeds.
std::vector<SummaryRow> summarize(const std::vector<Record>& records);
// Grouped text table; `points` maps params hashes to parameter objects.
void print_report(std::ostream& out, const std::vector<SummaryRow>& rows, const json& points);

}  // namespace lab
