#pragma once

#include <stdexcept>
#include <string>

namespace vpsde {

/// A schedule query at a time where the marginal noise std vanishes.
class SingularTimeError : public std::domain_error {
 public:
  explicit SingularTimeError(int step)
      : std::domain_error("singular time: marginal std is zero at step " + std::to_string(step)),
        step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// An Euler–Maruyama update produced a non-finite state or left the
/// |x|_inf <= 1e6 box.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(int step)
      : std::runtime_error("path diverged at step " + std::to_string(step)), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// More than the tolerated fraction of paths in a batch diverged.
class DivergenceBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vpsde
