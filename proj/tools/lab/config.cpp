#include <fstream>
#include <sstream>

#include "lab.hpp"
#include "recipes.hpp"

namespace lab {
namespace {

int line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Line of the first `"key"` at or after `from`; 0 when absent.
int line_of_key(const std::string& text, const std::string& key, std::size_t from = 0) {
  const std::size_t pos = text.find("\"" + key + "\"", from);
  return pos == std::string::npos ? 0 : line_at(text, pos);
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return !a.is_number_integer() || b.is_number_integer();
  return a.type() == b.type();
}

}  // namespace

ConfigError::ConfigError(const std::string& path, int line, const std::string& msg)
    : std::runtime_error(path + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + msg), line_(line) {}

std::string params_hash(const json& point) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : point.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> recipe_names() {
  std::vector<std::string> out;
  for (const auto& r : recipes()) out.push_back(r.name);
  return out;
}

json recipe_defaults(const std::string& recipe) {
  const RecipeDef* r = find_recipe(recipe);
  if (!r) throw std::invalid_argument("unknown recipe '" + recipe + "'");
  return r->defaults;
}

LabConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source, line_at(text, e.byte > 0 ? e.byte - 1 : 0), "invalid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ConfigError(source, 1, "top level must be an object");
  auto fail = [&](const std::string& key, const std::string& msg, std::size_t from = 0) {
    throw ConfigError(source, line_of_key(text, key, from), msg);
  };
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    static const std::vector<std::string> known = {"recipe", "seeds", "output_dir", "workers", "params"};
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) fail(it.key(), "unknown key '" + it.key() + "'");
  }

  LabConfig cfg;
  cfg.source = source;
  if (!doc.contains("recipe") || !doc["recipe"].is_string()) fail("recipe", "'recipe' must be a string");
  cfg.recipe = doc["recipe"].get<std::string>();
  const RecipeDef* recipe = find_recipe(cfg.recipe);
  if (!recipe) {
    std::string names;
    for (const auto& n : recipe_names()) names += (names.empty() ? "" : ", ") + n;
    fail("recipe", "unknown recipe '" + cfg.recipe + "' (known: " + names + ")");
  }

  if (!doc.contains("seeds") || !doc["seeds"].is_array() || doc["seeds"].empty())
    fail("seeds", "'seeds' must be a nonempty list");
  for (const auto& s : doc["seeds"]) {
    if (!s.is_number_unsigned()) fail("seeds", "seeds must be nonnegative integers");
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string() || doc["output_dir"].get<std::string>().empty())
      fail("output_dir", "'output_dir' must be a nonempty string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("workers")) {
    if (!doc["workers"].is_number_unsigned()) fail("workers", "'workers' must be a nonnegative integer");
    cfg.workers = doc["workers"].get<unsigned>();
  }

  cfg.params = recipe->defaults;
  const std::size_t params_at = text.find("\"params\"");
  if (doc.contains("params")) {
    const json& p = doc["params"];
    if (!p.is_object()) fail("params", "'params' must be an object");
    for (auto it = p.begin(); it != p.end(); ++it) {
      if (!cfg.params.contains(it.key()))
        fail(it.key(), "unknown parameter '" + it.key() + "' for recipe " + cfg.recipe, params_at);
      if (!same_kind(cfg.params[it.key()], it.value()))
        fail(it.key(), "parameter '" + it.key() + "' has the wrong type (default is " +
                           cfg.params[it.key()].dump() + ")", params_at);
      cfg.params[it.key()] = it.value();
    }
  }

  try {
    for (const auto& pt : recipe->expand(cfg.params)) recipe->validate(pt);
  } catch (const ParamError& e) {
    int line = params_at == std::string::npos ? 0 : line_of_key(text, e.key(), params_at);
    if (line == 0) line = params_at == std::string::npos ? line_of_key(text, "recipe") : line_at(text, params_at);
    throw ConfigError(source, line, e.what());
  }
  return cfg;
}

LabConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

json resolved_config(const LabConfig& cfg) {
  return {{"recipe", cfg.recipe},
          {"seeds", cfg.seeds},
          {"output_dir", cfg.output_dir},
          {"workers", cfg.workers},
          {"params", cfg.params}};
}

}  // namespace lab
