#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plastopt {

// Local or global Newton loop exceeded its iteration cap.
struct NewtonDivergence : std::runtime_error {
  NewtonDivergence(const std::string& what, int iterations_, double last_residual_)
      : std::runtime_error(what), iterations(iterations_), last_residual(last_residual_) {}
  int iterations;
  double last_residual;
};

// Config parsing/validation failure; carries every violation, not just the first.
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> violations_)
      : std::runtime_error(join(violations_)), violations(std::move(violations_)) {}
  std::vector<std::string> violations;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& m : v) s += "\n  - " + m;
    return s;
  }
};

}  // namespace plastopt
