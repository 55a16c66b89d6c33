#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "infodesign/infosignal.hpp"
#include "infodesign/model.hpp"

namespace infodesign {

/// Joint point (densities x, routing shares r).
struct SystemState {
  Eigen::VectorXd x;
  Eigen::VectorXd r;
};

/// Time derivative of a SystemState.
struct StateRate {
  Eigen::VectorXd dx;
  Eigen::VectorXd dr;
  double norm() const { return std::sqrt(dx.squaredNorm() + dr.squaredNorm()); }
};

/// dx = -f(x) + lambda r, dr = -r + sigma(u(x)).
StateRate rhs(const SystemState& state, const Network& network, const InformationSignal& signal,
              double eta);

struct IntegrationOptions {
  double t_end = 50.0;
  double dt = 0.01;
  int record_stride = 1;          // keep every n-th step (the last step is always kept)
  bool stop_when_settled = false;
  double settle_tolerance = 1e-9;  // on ||rhs||
  double renormalize_tolerance = 1e-12;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<double> lyapunov;  // empty when no reference equilibrium was supplied
  double max_simplex_drift = 0.0;
  bool settled = false;
  double final_rate_norm = 0.0;
};

/// Fixed-step classical RK4. Routing shares are renormalized onto the simplex
/// when they drift by more than the tolerance; the largest drift is reported.
/// Throws DivergenceError on a non-finite state.
Trajectory integrate(const SystemState& initial, const Network& network,
                     const InformationSignal& signal, double eta,
                     const IntegrationOptions& options = {},
                     const std::optional<SystemState>& reference = std::nullopt);

/// Box X x R' with R' = {r in simplex : r <= f_bar / lambda}.
struct InvariantSet {
  Eigen::VectorXd x_upper;
  Eigen::VectorXd r_upper;
  bool nonempty() const { return r_upper.sum() >= 1.0 - 1e-12; }
};

InvariantSet invariant_set(const Network& network);

struct InvarianceReport {
  std::size_t samples = 0;
  std::size_t density_violations = 0;
  std::size_t routing_violations = 0;
  std::optional<double> first_violation_time;
  double worst_density_excess = 0.0;
  double worst_routing_excess = 0.0;
  std::size_t violations() const { return density_violations + routing_violations; }
};

InvarianceReport check_invariance(const Trajectory& trajectory, const Network& network,
                                  double tolerance = 1e-6);

/// V = (alpha/2)|x - x_eq|^2 + (1/2)|r - r_eq|^2 with alpha = mu_m / lambda^2.
double lyapunov(const SystemState& state, const SystemState& reference, const Network& network);
double lyapunov_weight(const Network& network);

/// x = x_bar / 2 and r the projection of the uniform split onto R'.
SystemState centroid_state(const Network& network);
/// Uniform x in X; r uniform on the simplex, rejected until r <= f_bar / lambda.
SystemState random_invariant_state(const Network& network, std::mt19937_64& rng);

/// Header `t,x_1..x_p,r_1..r_p,V`, one row per stored sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace infodesign
