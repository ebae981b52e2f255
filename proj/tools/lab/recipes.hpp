#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lab.hpp"

namespace lab {

// A bad value for one parameter key; turned into a line-anchored ConfigError.
class ParamError : public std::invalid_argument {
 public:
  ParamError(std::string key, const std::string& msg) : std::invalid_argument(msg), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RecipeDef {
  std::string name;
  json defaults;
  // Parameter points, one job per point and seed.
  std::function<std::vector<json>(const json& params)> expand;
  // Throws ParamError, or parity::ResourceLimitError for oversized requests.
  std::function<void(const json& point)> validate;
  // Records without the recipe, hash and seed columns filled in.
  std::function<std::vector<Record>(const json& point, std::uint64_t stream)> run;
};

const std::vector<RecipeDef>& recipes();
const RecipeDef* find_recipe(const std::string& name);

}  // namespace lab
