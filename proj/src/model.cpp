#include "infodesign/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "infodesign/errors.hpp"

namespace infodesign {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be positive and finite");
  }
}

void require_density(double density) {
  if (!(density >= 0.0)) {
    throw DomainError("density must be nonnegative, got " + std::to_string(density));
  }
}

}  // namespace

std::string_view to_string(DiagramKind kind) {
  switch (kind) {
    case DiagramKind::Greenshields: return "greenshields";
    case DiagramKind::Triangular: return "triangular";
    case DiagramKind::Exponential: return "exponential";
    case DiagramKind::CappedLinear: return "capped_linear";
  }
  return "unknown";
}

DiagramKind diagram_kind_from_string(std::string_view name) {
  if (name == "greenshields") return DiagramKind::Greenshields;
  if (name == "triangular") return DiagramKind::Triangular;
  if (name == "exponential") return DiagramKind::Exponential;
  if (name == "capped_linear") return DiagramKind::CappedLinear;
  throw std::invalid_argument("unknown diagram kind '" + std::string(name) + "'");
}

FundamentalDiagram::FundamentalDiagram(DiagramKind kind, double critical_density, double flow,
                                       double shape)
    : kind_(kind), critical_density_(critical_density), flow_(flow), shape_(shape) {
  critical_flow_ = kind_ == DiagramKind::Exponential ? outflow(critical_density_) : flow_;
}

FundamentalDiagram FundamentalDiagram::greenshields(double critical_density, double critical_flow) {
  require_positive(critical_density, "critical density");
  require_positive(critical_flow, "critical flow");
  return {DiagramKind::Greenshields, critical_density, critical_flow, 0.0};
}

FundamentalDiagram FundamentalDiagram::triangular(double critical_density, double critical_flow,
                                                  double wave_speed) {
  require_positive(critical_density, "critical density");
  require_positive(critical_flow, "critical flow");
  require_positive(wave_speed, "wave speed");
  return {DiagramKind::Triangular, critical_density, critical_flow, wave_speed};
}

FundamentalDiagram FundamentalDiagram::exponential(double saturation_flow, double rate,
                                                   double critical_density) {
  require_positive(saturation_flow, "saturation flow");
  require_positive(rate, "rate");
  require_positive(critical_density, "critical density");
  return {DiagramKind::Exponential, critical_density, saturation_flow, rate};
}

FundamentalDiagram FundamentalDiagram::capped_linear(double slope, double critical_density) {
  require_positive(slope, "slope");
  require_positive(critical_density, "critical density");
  return {DiagramKind::CappedLinear, critical_density, slope * critical_density, slope};
}

double FundamentalDiagram::outflow(double x) const {
  require_density(x);
  const double xc = critical_density_;
  switch (kind_) {
    case DiagramKind::Greenshields:
      if (x >= 2.0 * xc) return 0.0;
      return (2.0 * flow_ / xc) * x * (1.0 - x / (2.0 * xc));
    case DiagramKind::Triangular:
      return std::max(0.0, std::min(flow_ / xc * x, flow_ + shape_ * (xc - x)));
    case DiagramKind::Exponential:
      return flow_ * -std::expm1(-shape_ * x);
    case DiagramKind::CappedLinear:
      return std::min(shape_ * x, flow_);
  }
  return 0.0;
}

double FundamentalDiagram::slope(double x) const {
  require_density(x);
  const double xc = critical_density_;
  switch (kind_) {
    case DiagramKind::Greenshields:
      return x >= 2.0 * xc ? 0.0 : (2.0 * flow_ / xc) * (1.0 - x / xc);
    case DiagramKind::Triangular:
      if (x <= xc) return flow_ / xc;
      return outflow(x) > 0.0 ? -shape_ : 0.0;
    case DiagramKind::Exponential:
      return flow_ * shape_ * std::exp(-shape_ * x);
    case DiagramKind::CappedLinear:
      return x <= xc ? shape_ : 0.0;
  }
  return 0.0;
}

double FundamentalDiagram::inverse(double q) const {
  if (!(q >= 0.0) || q > critical_flow_ * (1.0 + 1e-12)) {
    throw RangeError("flow " + std::to_string(q) + " has no free-flow preimage (critical flow " +
                     std::to_string(critical_flow_) + ")");
  }
  q = std::min(q, critical_flow_);
  const double xc = critical_density_;
  switch (kind_) {
    case DiagramKind::Greenshields:
      // smaller root of the parabola; 1 - sqrt(1 - s) written to avoid cancellation
      {
        const double s = q / flow_;
        return xc * s / (1.0 + std::sqrt(std::max(0.0, 1.0 - s)));
      }
    case DiagramKind::Triangular:
      return q * xc / flow_;
    case DiagramKind::Exponential:
      return -std::log1p(-q / flow_) / shape_;
    case DiagramKind::CappedLinear:
      return std::min(q / shape_, xc);
  }
  return 0.0;
}

double FundamentalDiagram::monotonicity_modulus() const {
  switch (kind_) {
    case DiagramKind::Greenshields: return 0.0;  // slope vanishes at the critical density
    case DiagramKind::Triangular: return flow_ / critical_density_;
    case DiagramKind::Exponential: return slope(critical_density_);
    case DiagramKind::CappedLinear: return shape_;
  }
  return 0.0;
}

Path::Path(FundamentalDiagram diagram, BprParams bpr)
    : diagram_(diagram), bpr_(bpr), modulus_(diagram_.monotonicity_modulus()) {
  require_positive(bpr_.free_flow_time, "free-flow time");
  require_positive(bpr_.theta, "BPR theta");
  require_positive(bpr_.delta, "BPR delta");
}

Network::Network(std::vector<Path> paths, double inflow) : paths_(std::move(paths)), inflow_(inflow) {
  if (paths_.empty()) throw std::invalid_argument("network needs at least one path");
  require_positive(inflow_, "inflow");
}

Eigen::VectorXd Network::critical_densities() const {
  Eigen::VectorXd out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = paths_[j].critical_density();
  return out;
}

Eigen::VectorXd Network::critical_flows() const {
  Eigen::VectorXd out(size());
  for (std::size_t j = 0; j < size(); ++j) out[j] = paths_[j].critical_flow();
  return out;
}

double outflow(const Path& path, double density) { return path.diagram().outflow(density); }

double inverse_outflow(const Path& path, double flow) { return path.diagram().inverse(flow); }

double travel_time(const Path& path, double density) {
  require_density(density);
  const auto& bpr = path.bpr();
  return bpr.free_flow_time *
         (1.0 + bpr.theta * std::pow(density / path.critical_density(), bpr.delta));
}

double travel_time_slope(const Path& path, double density) {
  require_density(density);
  const auto& bpr = path.bpr();
  const double xc = path.critical_density();
  if (density == 0.0) {
    if (bpr.delta > 1.0) return 0.0;
    if (bpr.delta == 1.0) return bpr.free_flow_time * bpr.theta / xc;
    return std::numeric_limits<double>::infinity();
  }
  return bpr.free_flow_time * bpr.theta * bpr.delta * std::pow(density / xc, bpr.delta - 1.0) / xc;
}

Eigen::VectorXd outflow(const Network& network, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(network.size());
  for (std::size_t j = 0; j < network.size(); ++j) out[j] = outflow(network.path(j), x[j]);
  return out;
}

Eigen::VectorXd outflow_slopes(const Network& network, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(network.size());
  for (std::size_t j = 0; j < network.size(); ++j) out[j] = network.path(j).diagram().slope(x[j]);
  return out;
}

Eigen::VectorXd inverse_outflow(const Network& network, const Eigen::VectorXd& q) {
  Eigen::VectorXd out(network.size());
  for (std::size_t j = 0; j < network.size(); ++j) out[j] = inverse_outflow(network.path(j), q[j]);
  return out;
}

Eigen::VectorXd travel_times(const Network& network, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(network.size());
  for (std::size_t j = 0; j < network.size(); ++j) out[j] = travel_time(network.path(j), x[j]);
  return out;
}

double monotonicity_modulus(const Network& network) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& path : network.paths()) m = std::min(m, path.monotonicity_modulus());
  return m;
}

bool strongly_monotone(const Network& network) { return monotonicity_modulus(network) > 0.0; }

double sampled_monotonicity_modulus(const FundamentalDiagram& diagram, int points) {
  if (points < 2) throw std::invalid_argument("need at least two grid points");
  const double h = diagram.critical_density() / (points - 1);
  double m = std::numeric_limits<double>::infinity();
  double prev = diagram.outflow(0.0);
  // min over adjacent pairs equals min over all grid pairs: any chord quotient
  // is a weighted mean of the adjacent ones it spans
  for (int i = 1; i < points; ++i) {
    const double x = std::min(i * h, diagram.critical_density());
    const double cur = diagram.outflow(x);
    m = std::min(m, (cur - prev) / h);
    prev = cur;
  }
  return std::max(m, 0.0);
}

}  // namespace infodesign
