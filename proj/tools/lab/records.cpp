#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "lab.hpp"

namespace lab {

std::string format_record(const Record& r) {
  char value[64];
  if (std::isnan(r.value)) {
    std::snprintf(value, sizeof value, "nan");
  } else {
    std::snprintf(value, sizeof value, "%.17g", r.value);
  }
  std::ostringstream os;
  os << r.recipe << ',' << r.params_hash << ',' << r.seed << ',' << r.step << ',' << r.metric << ',' << value;
  return os.str();
}

Record parse_record(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (fields.size() != 6) throw CsvError("expected 6 fields, got " + std::to_string(fields.size()));
  Record r;
  r.recipe = fields[0];
  r.params_hash = fields[1];
  r.metric = fields[4];
  if (r.recipe.empty() || r.metric.empty()) throw CsvError("empty recipe or metric");
  auto parse_int = [&](const std::string& s, const char* what) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno) throw CsvError(std::string("bad ") + what + " '" + s + "'");
    return v;
  };
  {
    char* end = nullptr;
    errno = 0;
    r.seed = std::strtoull(fields[2].c_str(), &end, 10);
    if (fields[2].empty() || *end != '\0' || errno || fields[2][0] == '-') throw CsvError("bad seed '" + fields[2] + "'");
  }
  r.step = parse_int(fields[3], "step");
  char* end = nullptr;
  r.value = std::strtod(fields[5].c_str(), &end);
  if (fields[5].empty() || *end != '\0') throw CsvError("bad value '" + fields[5] + "'");
  return r;
}

void write_csv(std::ostream& out, const std::vector<Record>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) out << format_record(r) << '\n';
}

std::vector<Record> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError("empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw CsvError("unexpected header '" + line + "'");
  std::vector<Record> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      out.push_back(parse_record(line));
    } catch (const CsvError& e) {
      throw CsvError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<Record>& records) {
  // key -> seed -> (step, value) of the last step seen
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::map<std::uint64_t, std::pair<std::int64_t, double>>> last;
  std::vector<Key> order;
  for (const auto& r : records) {
    const Key k{r.recipe, r.params_hash, r.metric};
    auto [it, inserted] = last.try_emplace(k);
    if (inserted) order.push_back(k);
    auto& slot = it->second;
    auto s = slot.find(r.seed);
    if (s == slot.end() || r.step >= s->second.first) slot[r.seed] = {r.step, r.value};
  }
  std::vector<SummaryRow> rows;
  for (const auto& k : order) {
    const auto& per_seed = last.at(k);
    SummaryRow row{std::get<0>(k), std::get<1>(k), std::get<2>(k), per_seed.size()};
    double sum = 0.0;
    for (const auto& [seed, sv] : per_seed) sum += sv.second;
    const double n = static_cast<double>(per_seed.size());
    row.mean = sum / n;
    if (per_seed.size() > 1) {
      double ss = 0.0;
      for (const auto& [seed, sv] : per_seed) ss += (sv.second - row.mean) * (sv.second - row.mean);
      row.ci_half = 1.96 * std::sqrt(ss / (n - 1.0) / n);
    }
    rows.push_back(row);
  }
  return rows;
}

void print_report(std::ostream& out, const std::vector<SummaryRow>& rows, const json& points) {
  std::map<std::string, std::vector<const SummaryRow*>> by_recipe;
  std::vector<std::string> recipes;
  for (const auto& r : rows) {
    if (!by_recipe.count(r.recipe)) recipes.push_back(r.recipe);
    by_recipe[r.recipe].push_back(&r);
  }
  for (const auto& recipe : recipes) {
    out << "== " << recipe << " ==\n";
    std::string current;
    for (const SummaryRow* r : by_recipe[recipe]) {
      if (r->params_hash != current) {
        current = r->params_hash;
        out << "[" << current << "]";
        if (points.is_object() && points.contains(current)) out << " " << points.at(current).dump();
        out << "\n";
      }
      char buf[160];
      if (r->ci_half) {
        std::snprintf(buf, sizeof buf, "  %-20s n=%-3zu mean=%.6g ci95=+-%.3g\n", r->metric.c_str(), r->seeds, r->mean,
                      *r->ci_half);
      } else {
        std::snprintf(buf, sizeof buf, "  %-20s n=%-3zu mean=%.6g ci95=undefined\n", r->metric.c_str(), r->seeds,
                      r->mean);
      }
      out << buf;
    }
  }
}

}  // namespace lab
