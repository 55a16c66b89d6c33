#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "infodesign/equilibrium.hpp"
#include "infodesign/infosignal.hpp"
#include "infodesign/model.hpp"

namespace infodesign {

/// Integral over [0, x_bar] of (a y + b - tau(y))^2, in closed form.
double credibility_penalty(const Path& path, double slope, double offset);
/// Same integral by 32-point Gauss-Legendre quadrature.
double credibility_penalty_quadrature(const Path& path, double slope, double offset);

struct TargetOptions {
  double flow_floor = 1e-6;      // relative to lambda
  double sum_tolerance = 5e-3;   // |sum_j f_j(x*_j) - lambda| / lambda
  bool floor_zero_flows = true;  // false: zero flows raise InfeasibleTarget(boundary)
};

struct FeasibleOffsets {
  Eigen::VectorXd offsets;  // b
  double shift = 0.0;       // the free additive constant c
  std::vector<bool> floored;
};

/// Offsets b that make x* an equilibrium of u = A x + b by inverting the softmax:
/// u_j(x*_j) = -(1/eta) ln(f_j(x*_j)/lambda) + c. The shift c minimises the
/// total credibility penalty.
FeasibleOffsets feasible_b_from_target(const Network& network, double eta,
                                       const Eigen::VectorXd& target,
                                       const Eigen::VectorXd& slopes,
                                       const TargetOptions& options = {});

struct DesignOptions {
  int starts = 20;
  int evaluations = 5000;            // per start, shared across penalty rounds
  std::uint64_t seed = 1;
  std::vector<double> penalty_weights{1e2, 1e4, 1e6};
  double flow_floor = 1e-6;          // minimum target flow, relative to lambda
  double residual_tolerance = 1e-6;  // on ||f(x*) - lambda sigma(A x* + b)||
  unsigned workers = 0;
};

struct DesignProblem {
  Network network;
  double eta = 1.0;
  double gamma = 0.0;
  DesignOptions options{};
};

struct DesignResult {
  Eigen::VectorXd slopes;   // a
  Eigen::VectorXd offsets;  // b
  Eigen::VectorXd target;   // x*
  Eigen::VectorXd routing;  // r* = f(x*) / lambda
  double shift = 0.0;
  double efficiency = 0.0;   // sum_j f_j(x*_j) tau_j(x*_j)
  double credibility = 0.0;  // sum_j of credibility_penalty
  double objective = 0.0;    // efficiency + gamma * credibility
  ConditionReport report;
  double equilibrium_residual = 0.0;
  double roundtrip_distance = 0.0;  // |solve_free_flow(designed signal) - x*|
  std::vector<double> start_objectives;  // penalised objective at each multistart seed point
  double best_penalised = 0.0;

  InformationSignal signal(const Network& network) const;
};

/// efficiency + gamma * credibility at an arbitrary (a, b, x*).
double design_objective(const Network& network, double gamma, const Eigen::VectorXd& slopes,
                        const Eigen::VectorXd& offsets, const Eigen::VectorXd& target);

/// Multistart Nelder-Mead over (flows, slopes); b is eliminated by softmax
/// inversion and the existence condition is enforced by ramped penalties.
/// Throws DesignFailure when no candidate is feasible.
DesignResult optimize(const DesignProblem& problem);

struct GammaPoint {
  double gamma = 0.0;
  DesignResult design;
  EquilibriumResult equilibrium;
  double total_travel_time = 0.0;
  double credibility_error = 0.0;  // |tau(x_eq) - u(x_eq)|
};

std::vector<GammaPoint> gamma_sweep(const DesignProblem& problem, const std::vector<double>& gammas);

/// Key-value text block.
void write_design_result(std::ostream& out, const Network& network, double eta, double gamma,
                         const DesignResult& result);
std::string design_csv_header(std::size_t paths);
std::string design_csv_row(double eta, double gamma, const DesignResult& result);

}  // namespace infodesign
