#pragma once

#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "infodesign/model.hpp"

namespace infodesign {

/// Per-path information map u_j(x_j) announced to drivers.
///
/// Construction validates the signal against a network: values must be
/// nonnegative on the free-flow region, and custom signals must respect their
/// declared derivative bounds on a sample grid.
class InformationSignal {
 public:
  enum class Kind { Affine, TrueTravelTime, Custom };
  using ScalarMap = std::function<double(double)>;

  /// u_j = a_j x_j + b_j.
  static InformationSignal affine(const Network& network, Eigen::VectorXd slopes,
                                  Eigen::VectorXd offsets);
  /// u_j = tau_j(x_j), the BPR travel time of the path.
  static InformationSignal true_travel_time(const Network& network);
  /// Arbitrary per-path maps with declared derivative bounds.
  static InformationSignal custom(const Network& network, std::vector<ScalarMap> maps,
                                  Eigen::VectorXd derivative_bounds);

  Kind kind() const { return kind_; }
  std::size_t size() const { return size_; }
  const Eigen::VectorXd& slopes() const { return slopes_; }
  const Eigen::VectorXd& offsets() const { return offsets_; }
  const Eigen::VectorXd& declared_bounds() const { return declared_bounds_; }

  double value(const Network& network, std::size_t j, double density) const;
  double derivative(const Network& network, std::size_t j, double density) const;

 private:
  InformationSignal(Kind kind, std::size_t size) : kind_(kind), size_(size) {}

  Kind kind_;
  std::size_t size_;
  Eigen::VectorXd slopes_, offsets_;
  std::vector<ScalarMap> maps_;
  Eigen::VectorXd declared_bounds_;
};

std::string_view to_string(InformationSignal::Kind kind);

/// Piecewise-linear interpolant through (density, value) knots, held constant outside.
InformationSignal::ScalarMap piecewise_linear(std::vector<std::pair<double, double>> knots);

Eigen::VectorXd evaluate(const InformationSignal& signal, const Network& network,
                         const Eigen::VectorXd& densities);
Eigen::VectorXd evaluate_derivative(const InformationSignal& signal, const Network& network,
                                    const Eigen::VectorXd& densities);

struct SignalBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd derivative;
  double max_derivative = 0.0;
};

SignalBounds bounds(const InformationSignal& signal, const Network& network);
/// Bounds of u = A x + b on the free-flow region, without constructing a signal.
SignalBounds affine_bounds(const Network& network, const Eigen::VectorXd& slopes,
                           const Eigen::VectorXd& offsets);

enum class CheckStatus { Pass, Boundary, Fail };
std::string_view to_string(CheckStatus status);

/// Per-path comparison of lambda against f_bar_j exp(eta u_j^a) sum_i exp(-eta u_i^b).
struct ExistenceCheck {
  Eigen::VectorXd value;       // right-hand side per path (may be +inf)
  Eigen::VectorXd log_margin;  // log(value) - log(lambda); >= 0 passes
  bool ok = false;
};

struct UniquenessCheck {
  double max_derivative = 0.0;  // l_M
  double threshold = 0.0;       // 2 mu_m / (lambda eta), +inf when eta = 0
  double slack = 0.0;           // threshold - l_M
  CheckStatus status = CheckStatus::Fail;
};

enum class Verdict { InClass, Boundary, Out };
std::string_view to_string(Verdict verdict);

struct ConditionReport {
  ExistenceCheck existence;
  ExistenceCheck necessity;
  UniquenessCheck uniqueness;
  Verdict verdict = Verdict::Out;

  bool existence_ok() const { return existence.ok; }
  bool necessity_ok() const { return necessity.ok; }
  bool uniqueness_stability_ok() const { return uniqueness.status == CheckStatus::Pass; }
  bool in_class_U() const { return verdict == Verdict::InClass; }
};

/// Sufficient condition for a free-flow equilibrium.
ExistenceCheck check_existence(const SignalBounds& b, const Network& network, double eta);
ExistenceCheck check_existence(const InformationSignal& signal, const Network& network, double eta);
/// Necessary condition; diagnostic only.
ExistenceCheck check_necessity(const SignalBounds& b, const Network& network, double eta);
ExistenceCheck check_necessity(const InformationSignal& signal, const Network& network, double eta);

/// Strict inequality l_M < 2 mu_m / (lambda eta); equality reports Boundary.
UniquenessCheck check_uniqueness_stability(const SignalBounds& b, const Network& network,
                                           double eta);
UniquenessCheck check_uniqueness_stability(const InformationSignal& signal,
                                           const Network& network, double eta);

ConditionReport check_class_U(const SignalBounds& b, const Network& network, double eta);
ConditionReport check_class_U(const InformationSignal& signal, const Network& network, double eta);

}  // namespace infodesign
