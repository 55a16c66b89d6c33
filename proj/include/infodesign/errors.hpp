#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace infodesign {

/// Argument outside the mathematical domain of an operation (negative density, non-finite input).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested value has no preimage in the free-flow region.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The integrator produced a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// An iterative solver failed; carries the best iterate seen.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, Eigen::VectorXd best_iterate, double residual)
      : std::runtime_error(what), best_(std::move(best_iterate)), residual_(residual) {}
  const Eigen::VectorXd& best_iterate() const noexcept { return best_; }
  double residual() const noexcept { return residual_; }

 private:
  Eigen::VectorXd best_;
  double residual_;
};

/// A design target violates sum_j f_j(x*_j) = lambda, or needs a zero routing share.
class InfeasibleTarget : public std::invalid_argument {
 public:
  InfeasibleTarget(const std::string& what, bool boundary)
      : std::invalid_argument(what), boundary_(boundary) {}
  /// True when the target is only infeasible because some f_j(x*_j) = 0.
  bool boundary() const noexcept { return boundary_; }

 private:
  bool boundary_;
};

/// No feasible design was found; carries the least-infeasible candidate.
class DesignFailure : public std::runtime_error {
 public:
  DesignFailure(const std::string& what, Eigen::VectorXd slopes, Eigen::VectorXd offsets,
                Eigen::VectorXd target, double violation)
      : std::runtime_error(what),
        slopes_(std::move(slopes)),
        offsets_(std::move(offsets)),
        target_(std::move(target)),
        violation_(violation) {}
  const Eigen::VectorXd& slopes() const noexcept { return slopes_; }
  const Eigen::VectorXd& offsets() const noexcept { return offsets_; }
  const Eigen::VectorXd& target() const noexcept { return target_; }
  double violation() const noexcept { return violation_; }

 private:
  Eigen::VectorXd slopes_, offsets_, target_;
  double violation_;
};

/// Scenario file problems, with the offending line (0 when not tied to a line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace infodesign
