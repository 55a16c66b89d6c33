#include "infodesign/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>

#include "infodesign/choice.hpp"
#include "infodesign/errors.hpp"
#include "infodesign/numerics.hpp"

namespace infodesign {

namespace {

// Densities this far below zero are treated as round-off and clipped.
constexpr double kNegativeDensityTol = 1e-9;

void require_state(const SystemState& s, std::size_t p) {
  if (static_cast<std::size_t>(s.x.size()) != p || static_cast<std::size_t>(s.r.size()) != p) {
    throw std::invalid_argument("state dimension does not match the network");
  }
}

}  // namespace

StateRate rhs(const SystemState& state, const Network& network, const InformationSignal& signal,
              double eta) {
  require_state(state, network.size());
  Eigen::VectorXd x = state.x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] < 0.0 && x[j] >= -kNegativeDensityTol) x[j] = 0.0;
  }
  StateRate rate;
  rate.dx = -outflow(network, x) + network.inflow() * state.r;
  rate.dr = -state.r + softmax(evaluate(signal, network, x), eta);
  return rate;
}

Trajectory integrate(const SystemState& initial, const Network& network,
                     const InformationSignal& signal, double eta,
                     const IntegrationOptions& options,
                     const std::optional<SystemState>& reference) {
  if (!(options.dt > 0.0) || !(options.t_end > 0.0)) {
    throw std::invalid_argument("dt and t_end must be positive");
  }
  if (options.record_stride < 1) throw std::invalid_argument("record stride must be >= 1");
  require_state(initial, network.size());
  if ((initial.r.array() < 0.0).any() || std::abs(initial.r.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("initial routing shares must lie on the simplex");
  }
  if ((initial.x.array() < 0.0).any()) throw DomainError("initial densities must be nonnegative");

  const auto p = static_cast<Eigen::Index>(network.size());
  const auto steps = static_cast<long>(std::ceil(options.t_end / options.dt - 1e-9));

  Trajectory traj;
  traj.times.reserve(steps / options.record_stride + 2);
  traj.states.reserve(steps / options.record_stride + 2);

  auto record = [&](double t, const SystemState& s) {
    traj.times.push_back(t);
    traj.states.push_back(s);
    if (reference) traj.lyapunov.push_back(lyapunov(s, *reference, network));
  };

  auto field = [&](const SystemState& s) { return rhs(s, network, signal, eta); };
  auto shifted = [](const SystemState& s, const StateRate& k, double h) {
    return SystemState{s.x + h * k.dx, s.r + h * k.dr};
  };

  SystemState s = initial;
  record(0.0, s);
  double t = 0.0;
  for (long step = 1; step <= steps; ++step) {
    const double h = std::min(options.dt, options.t_end - t);
    const StateRate k1 = field(s);
    if (options.stop_when_settled && k1.norm() <= options.settle_tolerance) {
      traj.settled = true;
      traj.final_rate_norm = k1.norm();
      if (traj.times.back() != t) record(t, s);
      return traj;
    }
    const StateRate k2 = field(shifted(s, k1, 0.5 * h));
    const StateRate k3 = field(shifted(s, k2, 0.5 * h));
    const StateRate k4 = field(shifted(s, k3, h));
    s.x += h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    s.r += h / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);
    t = step == steps ? options.t_end : t + h;

    if (!s.x.allFinite() || !s.r.allFinite()) {
      throw DivergenceError("non-finite state at t = " + std::to_string(t), t);
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      if (s.x[j] < 0.0) {
        if (s.x[j] < -kNegativeDensityTol) {
          throw DivergenceError("density on path " + std::to_string(j + 1) +
                                    " became negative at t = " + std::to_string(t), t);
        }
        s.x[j] = 0.0;
      }
    }
    const double drift = std::max(std::abs(s.r.sum() - 1.0), std::max(0.0, -s.r.minCoeff()));
    traj.max_simplex_drift = std::max(traj.max_simplex_drift, drift);
    if (drift > options.renormalize_tolerance) {
      s.r = s.r.cwiseMax(0.0);
      s.r /= s.r.sum();
    }
    if (step % options.record_stride == 0 || step == steps) record(t, s);
  }
  traj.final_rate_norm = field(s).norm();
  traj.settled = options.stop_when_settled && traj.final_rate_norm <= options.settle_tolerance;
  return traj;
}

InvariantSet invariant_set(const Network& network) {
  return {network.critical_densities(), network.critical_flows() / network.inflow()};
}

InvarianceReport check_invariance(const Trajectory& trajectory, const Network& network,
                                  double tolerance) {
  const InvariantSet set = invariant_set(network);
  InvarianceReport report;
  report.samples = trajectory.states.size();
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    const SystemState& s = trajectory.states[k];
    const double dx = (s.x - set.x_upper).maxCoeff();
    const double dr = (s.r - set.r_upper).maxCoeff();
    const bool bad_x = dx > tolerance;
    const bool bad_r = dr > tolerance;
    report.worst_density_excess = std::max(report.worst_density_excess, dx);
    report.worst_routing_excess = std::max(report.worst_routing_excess, dr);
    if (bad_x) ++report.density_violations;
    if (bad_r) ++report.routing_violations;
    if ((bad_x || bad_r) && !report.first_violation_time) {
      report.first_violation_time = trajectory.times[k];
    }
  }
  return report;
}

double lyapunov_weight(const Network& network) {
  return monotonicity_modulus(network) / (network.inflow() * network.inflow());
}

double lyapunov(const SystemState& state, const SystemState& reference, const Network& network) {
  const double alpha = lyapunov_weight(network);
  return 0.5 * alpha * (state.x - reference.x).squaredNorm() +
         0.5 * (state.r - reference.r).squaredNorm();
}

SystemState centroid_state(const Network& network) {
  const InvariantSet set = invariant_set(network);
  if (!set.nonempty()) throw std::invalid_argument("R' is empty: total capacity below inflow");
  const auto p = static_cast<Eigen::Index>(network.size());
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(p, 1.0 / static_cast<double>(p));
  return {0.5 * set.x_upper,
          project_capped_simplex(uniform, Eigen::VectorXd::Zero(p), set.r_upper.cwiseMin(1.0), 1.0)};
}

SystemState random_invariant_state(const Network& network, std::mt19937_64& rng) {
  const InvariantSet set = invariant_set(network);
  if (!set.nonempty()) throw std::invalid_argument("R' is empty: total capacity below inflow");
  const auto p = static_cast<Eigen::Index>(network.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  SystemState s{Eigen::VectorXd(p), Eigen::VectorXd(p)};
  for (Eigen::Index j = 0; j < p; ++j) s.x[j] = unit(rng) * set.x_upper[j];
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (Eigen::Index j = 0; j < p; ++j) s.r[j] = expo(rng);
    s.r /= s.r.sum();
    if ((s.r.array() <= set.r_upper.array()).all()) return s;
  }
  throw std::runtime_error("rejection sampling of R' did not succeed");
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  if (trajectory.states.empty()) return;
  const auto p = trajectory.states.front().x.size();
  out << "t";
  for (Eigen::Index j = 1; j <= p; ++j) out << ",x_" << j;
  for (Eigen::Index j = 1; j <= p; ++j) out << ",r_" << j;
  out << ",V\n";
  out << std::setprecision(12);
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    const auto& s = trajectory.states[k];
    out << trajectory.times[k];
    for (Eigen::Index j = 0; j < p; ++j) out << ',' << s.x[j];
    for (Eigen::Index j = 0; j < p; ++j) out << ',' << s.r[j];
    out << ',';
    if (!trajectory.lyapunov.empty()) out << trajectory.lyapunov[k]; else out << "nan";
    out << '\n';
  }
}

}  // namespace infodesign
