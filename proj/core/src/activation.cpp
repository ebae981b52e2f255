#include "parity/activation.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace parity {

Activation Activation::clipped(double clip) {
  if (!(clip > 0.0)) throw std::invalid_argument("clipped relu needs clip > 0");
  return {Kind::clipped_relu, clip};
}

double Activation::operator()(double x) const {
  switch (kind) {
    case Kind::relu:
      return x > 0.0 ? x : 0.0;
    case Kind::clipped_relu:
      return std::clamp(x, 0.0, clip);
    case Kind::threshold:
      return x >= 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double Activation::derivative(double x) const {
  switch (kind) {
    case Kind::relu:
      return x >= 0.0 ? 1.0 : 0.0;
    case Kind::clipped_relu:
      return (x >= 0.0 && x < clip) ? 1.0 : 0.0;
    case Kind::threshold:
      return 0.0;
  }
  return 0.0;
}

std::string Activation::name() const {
  switch (kind) {
    case Kind::relu:
      return "relu";
    case Kind::clipped_relu: {
      std::string c = std::to_string(clip);
      c.erase(c.find_last_not_of('0') + 1);
      if (!c.empty() && c.back() == '.') c.pop_back();
      return "crelu" + c;
    }
    case Kind::threshold:
      return "threshold";
  }
  return "?";
}

// Accepts "relu", "threshold", "crelu<clip>" or "crelu:<clip>".
Activation Activation::parse(const std::string& text) {
  if (text == "relu") return relu();
  if (text == "threshold" || text == "step") return threshold();
  if (text.rfind("crelu", 0) == 0) {
    std::string rest = text.substr(5);
    if (!rest.empty() && rest.front() == ':') rest.erase(0, 1);
    if (rest.empty()) return clipped(5.0);
    char* end = nullptr;
    double c = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str() || *end != '\0') {
      throw std::invalid_argument("bad clip value in activation '" + text + "'");
    }
    return clipped(c);
  }
  throw std::invalid_argument("unknown activation '" + text + "'");
}

}  // namespace parity
