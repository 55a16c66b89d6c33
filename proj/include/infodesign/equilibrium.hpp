#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "infodesign/infosignal.hpp"
#include "infodesign/model.hpp"

namespace infodesign {

enum class Regime { FreeFlow, Congested };
enum class SolveMethod { FixedPoint, Newton, Simulation };

std::string_view to_string(Regime regime);
std::string_view to_string(SolveMethod method);

/// Solution of f(x) = lambda sigma(u(x)), with r_eq = f(x_eq) / lambda.
struct EquilibriumResult {
  Eigen::VectorXd x;
  Eigen::VectorXd r;
  double residual = 0.0;  // ||f(x) - lambda sigma(u(x))||
  std::vector<Regime> regime;
  SolveMethod method = SolveMethod::FixedPoint;
  int iterations = 0;
  bool converged = false;

  bool all_free_flow() const;
};

/// ||f(x) - lambda sigma(u(x))||.
double equilibrium_residual(const Network& network, const InformationSignal& signal, double eta,
                            const Eigen::VectorXd& x);

struct FreeFlowOptions {
  std::optional<Eigen::VectorXd> start;  // defaults to x_bar / 2
  double damping = 0.5;
  int max_fixed_point_iterations = 10000;
  int max_newton_iterations = 200;
  double tolerance = 1e-12;   // convergence target on the residual
  double acceptance = 1e-8;   // largest residual returned without error
};

/// Damped fixed-point iteration x <- (1-beta) x + beta f^{-1}(lambda sigma(u(x))) on the
/// free-flow box, falling back to a damped Newton method on f(x) - lambda sigma(u(x)).
/// Throws SolverError (with the best iterate) when neither reaches the acceptance residual.
EquilibriumResult solve_free_flow(const Network& network, const InformationSignal& signal,
                                  double eta, const FreeFlowOptions& options = {});

struct ExtendedOptions {
  double t_end = 500.0;
  double dt = 0.01;
  double settle_tolerance = 1e-9;
  std::optional<Eigen::VectorXd> start_x;  // defaults to the centroid of X x R'
};

/// Long-horizon simulation on the extended outflow domain; classifies each
/// path's regime. A run that does not settle is returned with converged = false.
EquilibriumResult solve_extended(const Network& network, const InformationSignal& signal,
                                 double eta, const ExtendedOptions& options = {});

struct UniquenessProbe {
  std::size_t converged = 0;
  std::size_t failed = 0;
  double max_pairwise_distance = 0.0;
  std::vector<Eigen::VectorXd> equilibria;
};

/// Runs solve_free_flow from random starts in X and measures their spread.
UniquenessProbe multistart_uniqueness_probe(const Network& network,
                                            const InformationSignal& signal, double eta,
                                            std::size_t starts, std::uint64_t seed = 1);

/// sum_j f_j(x_j) tau_j(x_j).
double total_travel_time(const Network& network, const Eigen::VectorXd& densities);

struct CongestionOnset {
  std::optional<double> eta;          // first eta with some x_j^eq > x_bar_j
  std::optional<std::size_t> path;    // index of the path that congests first
  std::vector<double> grid;
  std::vector<bool> congested;        // coarse-grid classification
};

/// Coarse grid over [eta_min, eta_max], then bisection on the first bracketing cell.
CongestionOnset find_congestion_onset(const Network& network, const InformationSignal& signal,
                                      double eta_min, double eta_max, int count,
                                      int bisection_iterations = 30,
                                      const ExtendedOptions& options = {});

/// `path,x_eq,r_eq,regime,f,tau` rows followed by residual and total travel time rows.
void write_equilibrium_csv(std::ostream& out, const Network& network,
                           const EquilibriumResult& result);

}  // namespace infodesign
