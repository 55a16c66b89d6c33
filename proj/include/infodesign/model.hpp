#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace infodesign {

enum class DiagramKind { Greenshields, Triangular, Exponential, CappedLinear };

std::string_view to_string(DiagramKind kind);
DiagramKind diagram_kind_from_string(std::string_view name);

/// Density-to-outflow map of a single path.
///
/// Every kind satisfies f(0) = 0 and is increasing on the free-flow region
/// [0, critical_density()]. Beyond it each kind keeps its natural extension:
/// Greenshields follows the parabola to twice the critical density and is 0
/// afterwards, Triangular decreases with the congestion wave speed (clamped at
/// 0), CappedLinear saturates, Exponential is used as is.
class FundamentalDiagram {
 public:
  static FundamentalDiagram greenshields(double critical_density, double critical_flow);
  static FundamentalDiagram triangular(double critical_density, double critical_flow,
                                       double wave_speed);
  /// f(x) = saturation_flow * (1 - exp(-rate * x)); the critical flow is f(critical_density).
  static FundamentalDiagram exponential(double saturation_flow, double rate,
                                        double critical_density);
  /// f(x) = min(slope * x, slope * critical_density).
  static FundamentalDiagram capped_linear(double slope, double critical_density);

  DiagramKind kind() const { return kind_; }
  double critical_density() const { return critical_density_; }
  double critical_flow() const { return critical_flow_; }

  /// Raw kind-specific parameter: wave speed (Triangular), rate (Exponential),
  /// slope (CappedLinear), saturation flow (Exponential uses flow_param()).
  double shape_param() const { return shape_; }
  double flow_param() const { return flow_; }

  double operator()(double density) const { return outflow(density); }
  double outflow(double density) const;
  /// Left derivative for densities at or below the critical density, right derivative above.
  double slope(double density) const;
  /// Unique density in [0, critical_density()] with outflow == flow.
  double inverse(double flow) const;
  /// Infimum of difference quotients on the free-flow region (closed form).
  double monotonicity_modulus() const;

 private:
  FundamentalDiagram(DiagramKind kind, double critical_density, double flow, double shape);

  DiagramKind kind_;
  double critical_density_;
  double flow_;   // critical flow, or saturation flow for Exponential
  double shape_;  // wave speed / rate / slope; unused for Greenshields
  double critical_flow_;
};

/// Bureau of Public Roads travel-time parameters.
struct BprParams {
  double free_flow_time = 1.0;
  double theta = 0.15;
  double delta = 4.0;
};

class Path {
 public:
  Path(FundamentalDiagram diagram, BprParams bpr);

  const FundamentalDiagram& diagram() const { return diagram_; }
  const BprParams& bpr() const { return bpr_; }
  double critical_density() const { return diagram_.critical_density(); }
  double critical_flow() const { return diagram_.critical_flow(); }
  double free_flow_time() const { return bpr_.free_flow_time; }
  double monotonicity_modulus() const { return modulus_; }

 private:
  FundamentalDiagram diagram_;
  BprParams bpr_;
  double modulus_;
};

/// p parallel paths sharing one origin-destination pair.
class Network {
 public:
  Network(std::vector<Path> paths, double inflow);

  std::size_t size() const { return paths_.size(); }
  const std::vector<Path>& paths() const { return paths_; }
  const Path& path(std::size_t j) const { return paths_.at(j); }
  double inflow() const { return inflow_; }

  Eigen::VectorXd critical_densities() const;
  Eigen::VectorXd critical_flows() const;

 private:
  std::vector<Path> paths_;
  double inflow_;
};

double outflow(const Path& path, double density);
double inverse_outflow(const Path& path, double flow);
double travel_time(const Path& path, double density);
double travel_time_slope(const Path& path, double density);

Eigen::VectorXd outflow(const Network& network, const Eigen::VectorXd& densities);
Eigen::VectorXd outflow_slopes(const Network& network, const Eigen::VectorXd& densities);
Eigen::VectorXd inverse_outflow(const Network& network, const Eigen::VectorXd& flows);
Eigen::VectorXd travel_times(const Network& network, const Eigen::VectorXd& densities);

/// mu_m = min_j mu_j. Zero means some path is not strongly monotone on its free-flow region.
double monotonicity_modulus(const Network& network);
bool strongly_monotone(const Network& network);

/// Smallest difference quotient of the outflow over a uniform grid on [0, critical density].
double sampled_monotonicity_modulus(const FundamentalDiagram& diagram, int points = 1000);

}  // namespace infodesign
