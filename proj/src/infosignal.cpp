#include "infodesign/infosignal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "infodesign/errors.hpp"

namespace infodesign {

namespace {

constexpr int kGridPoints = 1000;
constexpr double kSampleTol = 1e-9;
constexpr double kSlopeTol = 1e-6;

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + " has length " + std::to_string(got) +
                                ", network has " + std::to_string(want) + " paths");
  }
}

double log_sum_exp(const Eigen::ArrayXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v - m).exp().sum());
}

// log(f_bar_j) + log sum_i exp(-eta (far_i - near_j)), compared against log(lambda)
ExistenceCheck compare_inflow(const Eigen::VectorXd& near, const Eigen::VectorXd& far,
                              const Network& network, double eta) {
  const std::size_t p = network.size();
  ExistenceCheck out;
  out.value.resize(p);
  out.log_margin.resize(p);
  const Eigen::VectorXd fbar = network.critical_flows();
  const double log_inflow = std::log(network.inflow());
  out.ok = true;
  for (std::size_t j = 0; j < p; ++j) {
    const Eigen::ArrayXd expo = -eta * (far.array() - near[j]);
    const double log_value = std::log(fbar[j]) + log_sum_exp(expo);
    out.value[j] = std::exp(log_value);
    out.log_margin[j] = log_value - log_inflow;
    if (out.log_margin[j] < -1e-12) out.ok = false;
  }
  return out;
}

}  // namespace

std::string_view to_string(InformationSignal::Kind kind) {
  switch (kind) {
    case InformationSignal::Kind::Affine: return "affine";
    case InformationSignal::Kind::TrueTravelTime: return "true_travel_time";
    case InformationSignal::Kind::Custom: return "custom";
  }
  return "unknown";
}

std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Boundary: return "boundary";
    case CheckStatus::Fail: return "fail";
  }
  return "unknown";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::InClass: return "in-U";
    case Verdict::Boundary: return "boundary";
    case Verdict::Out: return "out";
  }
  return "unknown";
}

InformationSignal InformationSignal::affine(const Network& network, Eigen::VectorXd slopes,
                                            Eigen::VectorXd offsets) {
  require_size(slopes.size(), network.size(), "slope vector");
  require_size(offsets.size(), network.size(), "offset vector");
  if (!slopes.allFinite() || !offsets.allFinite()) {
    throw std::invalid_argument("affine signal parameters must be finite");
  }
  const Eigen::VectorXd xbar = network.critical_densities();
  for (std::size_t j = 0; j < network.size(); ++j) {
    const double low = std::min(offsets[j], offsets[j] + slopes[j] * xbar[j]);
    if (low < 0.0) {
      throw std::invalid_argument("affine signal on path " + std::to_string(j + 1) +
                                  " is negative on the free-flow region");
    }
  }
  InformationSignal s(Kind::Affine, network.size());
  s.slopes_ = std::move(slopes);
  s.offsets_ = std::move(offsets);
  return s;
}

InformationSignal InformationSignal::true_travel_time(const Network& network) {
  return InformationSignal(Kind::TrueTravelTime, network.size());
}

InformationSignal InformationSignal::custom(const Network& network, std::vector<ScalarMap> maps,
                                            Eigen::VectorXd derivative_bounds) {
  require_size(maps.size(), network.size(), "custom map list");
  require_size(derivative_bounds.size(), network.size(), "derivative bound vector");
  for (std::size_t j = 0; j < network.size(); ++j) {
    if (!maps[j]) throw std::invalid_argument("custom map is empty");
    const double bound = derivative_bounds[j];
    if (!(bound >= 0.0)) throw std::invalid_argument("derivative bounds must be nonnegative");
    const double xc = network.path(j).critical_density();
    const double h = xc / (kGridPoints - 1);
    double prev = maps[j](0.0);
    for (int i = 0; i < kGridPoints; ++i) {
      const double x = i * h;
      const double u = maps[j](x);
      if (!(u >= 0.0)) {
        throw std::invalid_argument("custom signal on path " + std::to_string(j + 1) +
                                    " is negative at density " + std::to_string(x));
      }
      if (i > 0 && std::abs(u - prev) / h > bound + kSlopeTol) {
        throw std::invalid_argument("custom signal on path " + std::to_string(j + 1) +
                                    " exceeds its declared derivative bound near density " +
                                    std::to_string(x));
      }
      prev = u;
    }
  }
  InformationSignal s(Kind::Custom, network.size());
  s.maps_ = std::move(maps);
  s.declared_bounds_ = std::move(derivative_bounds);
  return s;
}

double InformationSignal::value(const Network& network, std::size_t j, double x) const {
  if (!(x >= 0.0)) throw DomainError("density must be nonnegative");
  switch (kind_) {
    case Kind::Affine: return slopes_[j] * x + offsets_[j];
    case Kind::TrueTravelTime: return travel_time(network.path(j), x);
    case Kind::Custom: return maps_[j](x);
  }
  return 0.0;
}

double InformationSignal::derivative(const Network& network, std::size_t j, double x) const {
  if (!(x >= 0.0)) throw DomainError("density must be nonnegative");
  switch (kind_) {
    case Kind::Affine: return slopes_[j];
    case Kind::TrueTravelTime: return travel_time_slope(network.path(j), x);
    case Kind::Custom: {
      const double h = 1e-7 * std::max(1.0, network.path(j).critical_density());
      if (x < h) return (maps_[j](x + h) - maps_[j](x)) / h;
      return (maps_[j](x + h) - maps_[j](x - h)) / (2.0 * h);
    }
  }
  return 0.0;
}

InformationSignal::ScalarMap piecewise_linear(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw std::invalid_argument("piecewise-linear map needs at least one knot");
  std::sort(knots.begin(), knots.end());
  return [knots = std::move(knots)](double x) {
    if (x <= knots.front().first) return knots.front().second;
    if (x >= knots.back().first) return knots.back().second;
    auto hi = std::upper_bound(knots.begin(), knots.end(), x,
                               [](double v, const auto& k) { return v < k.first; });
    auto lo = std::prev(hi);
    const double t = (x - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
  };
}

Eigen::VectorXd evaluate(const InformationSignal& signal, const Network& network,
                         const Eigen::VectorXd& x) {
  require_size(x.size(), network.size(), "density vector");
  Eigen::VectorXd u(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) u[j] = signal.value(network, j, x[j]);
  return u;
}

Eigen::VectorXd evaluate_derivative(const InformationSignal& signal, const Network& network,
                                    const Eigen::VectorXd& x) {
  require_size(x.size(), network.size(), "density vector");
  Eigen::VectorXd d(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) d[j] = signal.derivative(network, j, x[j]);
  return d;
}

SignalBounds affine_bounds(const Network& network, const Eigen::VectorXd& a,
                           const Eigen::VectorXd& b) {
  const Eigen::VectorXd top = b + a.cwiseProduct(network.critical_densities());
  SignalBounds out;
  out.lower = b.cwiseMin(top);
  out.upper = b.cwiseMax(top);
  out.derivative = a.cwiseAbs();
  out.max_derivative = out.derivative.maxCoeff();
  return out;
}

SignalBounds bounds(const InformationSignal& signal, const Network& network) {
  const std::size_t p = network.size();
  switch (signal.kind()) {
    case InformationSignal::Kind::Affine:
      return affine_bounds(network, signal.slopes(), signal.offsets());
    case InformationSignal::Kind::TrueTravelTime: {
      SignalBounds out;
      out.lower.resize(p);
      out.upper.resize(p);
      out.derivative.resize(p);
      for (std::size_t j = 0; j < p; ++j) {
        const Path& path = network.path(j);
        out.lower[j] = path.free_flow_time();
        out.upper[j] = path.free_flow_time() * (1.0 + path.bpr().theta);
        // BPR is convex for delta >= 1, so the slope peaks at the critical density
        out.derivative[j] = path.bpr().delta >= 1.0
                                ? travel_time_slope(path, path.critical_density())
                                : std::numeric_limits<double>::infinity();
      }
      out.max_derivative = out.derivative.maxCoeff();
      return out;
    }
    case InformationSignal::Kind::Custom: {
      SignalBounds out;
      out.lower = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::infinity());
      out.upper = Eigen::VectorXd::Constant(p, -std::numeric_limits<double>::infinity());
      for (std::size_t j = 0; j < p; ++j) {
        const double h = network.path(j).critical_density() / (kGridPoints - 1);
        for (int i = 0; i < kGridPoints; ++i) {
          const double u = signal.value(network, j, i * h);
          out.lower[j] = std::min(out.lower[j], u);
          out.upper[j] = std::max(out.upper[j], u);
        }
      }
      out.derivative = signal.declared_bounds();
      out.max_derivative = out.derivative.maxCoeff();
      return out;
    }
  }
  throw std::logic_error("unhandled signal kind");
}

ExistenceCheck check_existence(const SignalBounds& b, const Network& network, double eta) {
  return compare_inflow(b.lower, b.upper, network, eta);
}

ExistenceCheck check_existence(const InformationSignal& signal, const Network& network,
                               double eta) {
  return check_existence(bounds(signal, network), network, eta);
}

ExistenceCheck check_necessity(const SignalBounds& b, const Network& network, double eta) {
  return compare_inflow(b.upper, b.lower, network, eta);
}

ExistenceCheck check_necessity(const InformationSignal& signal, const Network& network,
                               double eta) {
  return check_necessity(bounds(signal, network), network, eta);
}

UniquenessCheck check_uniqueness_stability(const SignalBounds& b, const Network& network,
                                           double eta) {
  UniquenessCheck out;
  out.max_derivative = b.max_derivative;
  if (eta == 0.0) {
    out.threshold = std::numeric_limits<double>::infinity();
    out.slack = std::numeric_limits<double>::infinity();
    out.status = CheckStatus::Pass;
    return out;
  }
  out.threshold = 2.0 * monotonicity_modulus(network) / (network.inflow() * eta);
  out.slack = out.threshold - out.max_derivative;
  const double tol = 1e-12 * std::max(1.0, out.threshold);
  if (std::abs(out.slack) <= tol) {
    out.status = CheckStatus::Boundary;
  } else {
    out.status = out.slack > 0.0 ? CheckStatus::Pass : CheckStatus::Fail;
  }
  return out;
}

UniquenessCheck check_uniqueness_stability(const InformationSignal& signal,
                                           const Network& network, double eta) {
  return check_uniqueness_stability(bounds(signal, network), network, eta);
}

ConditionReport check_class_U(const SignalBounds& b, const Network& network, double eta) {
  ConditionReport report;
  report.existence = check_existence(b, network, eta);
  report.necessity = check_necessity(b, network, eta);
  report.uniqueness = check_uniqueness_stability(b, network, eta);
  if (!report.existence.ok || report.uniqueness.status == CheckStatus::Fail) {
    report.verdict = Verdict::Out;
  } else if (report.uniqueness.status == CheckStatus::Boundary) {
    report.verdict = Verdict::Boundary;
  } else {
    report.verdict = Verdict::InClass;
  }
  return report;
}

ConditionReport check_class_U(const InformationSignal& signal, const Network& network,
                              double eta) {
  return check_class_U(bounds(signal, network), network, eta);
}

}  // namespace infodesign
