#pragma once

#include <stdexcept>
#include <string>

namespace ctrldiffuse {

/// Bad or inconsistent configuration (maps to exit code 2).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric blow-up during a rollout or solve (maps to exit code 3).
class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(const std::string& what, long step = -1)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace ctrldiffuse
