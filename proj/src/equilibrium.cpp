#include "infodesign/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <string>

#include "infodesign/choice.hpp"
#include "infodesign/dynamics.hpp"
#include "infodesign/errors.hpp"
#include "infodesign/numerics.hpp"

namespace infodesign {

namespace {

std::vector<Regime> classify(const Network& network, const Eigen::VectorXd& x) {
  std::vector<Regime> out(network.size());
  for (std::size_t j = 0; j < network.size(); ++j) {
    out[j] = x[j] > network.path(j).critical_density() ? Regime::Congested : Regime::FreeFlow;
  }
  return out;
}

EquilibriumResult package(const Network& network, const InformationSignal& signal, double eta,
                          const Eigen::VectorXd& x, SolveMethod method, int iterations) {
  EquilibriumResult res;
  res.x = x;
  res.r = outflow(network, x) / network.inflow();
  res.residual = equilibrium_residual(network, signal, eta, x);
  res.regime = classify(network, x);
  res.method = method;
  res.iterations = iterations;
  return res;
}

// Newton on g(x) = f(x) - lambda sigma(u(x)) with backtracking, projected onto [0, x_bar].
Eigen::VectorXd newton(const Network& network, const InformationSignal& signal, double eta,
                       Eigen::VectorXd x, const FreeFlowOptions& opt, int& iterations) {
  const Eigen::VectorXd xbar = network.critical_densities();
  const double lambda = network.inflow();
  auto g = [&](const Eigen::VectorXd& y) {
    return Eigen::VectorXd(outflow(network, y) - lambda * softmax(evaluate(signal, network, y), eta));
  };
  Eigen::VectorXd gx = g(x);
  for (iterations = 0; iterations < opt.max_newton_iterations; ++iterations) {
    const double norm = gx.norm();
    if (norm <= opt.tolerance) break;
    const Eigen::VectorXd u = evaluate(signal, network, x);
    Eigen::MatrixXd jac = -lambda * softmax_jacobian(u, eta) *
                          evaluate_derivative(signal, network, x).asDiagonal();
    jac.diagonal() += outflow_slopes(network, x);
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-gx);
    if (!step.allFinite()) break;
    double t = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = (x + t * step).cwiseMax(0.0).cwiseMin(xbar);
      const Eigen::VectorXd gt = g(trial);
      if (gt.norm() < (1.0 - 1e-4 * t) * norm) {
        x = trial;
        gx = gt;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return x;
}

}  // namespace

std::string_view to_string(Regime regime) {
  return regime == Regime::FreeFlow ? "free_flow" : "congested";
}

std::string_view to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::FixedPoint: return "fixed_point";
    case SolveMethod::Newton: return "newton";
    case SolveMethod::Simulation: return "simulation";
  }
  return "unknown";
}

bool EquilibriumResult::all_free_flow() const {
  return std::all_of(regime.begin(), regime.end(), [](Regime r) { return r == Regime::FreeFlow; });
}

double equilibrium_residual(const Network& network, const InformationSignal& signal, double eta,
                            const Eigen::VectorXd& x) {
  return (outflow(network, x) - network.inflow() * softmax(evaluate(signal, network, x), eta))
      .norm();
}

EquilibriumResult solve_free_flow(const Network& network, const InformationSignal& signal,
                                  double eta, const FreeFlowOptions& opt) {
  const Eigen::VectorXd xbar = network.critical_densities();
  const Eigen::VectorXd fbar = network.critical_flows();
  const double lambda = network.inflow();
  Eigen::VectorXd x = opt.start ? opt.start->cwiseMax(0.0).cwiseMin(xbar) : Eigen::VectorXd(0.5 * xbar);
  if (x.size() != xbar.size()) throw std::invalid_argument("start has the wrong dimension");

  Eigen::VectorXd best = x;
  double best_residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < opt.max_fixed_point_iterations; ++it) {
    const Eigen::VectorXd demand = lambda * softmax(evaluate(signal, network, x), eta);
    const double residual = (outflow(network, x) - demand).norm();
    if (residual < best_residual) {
      best_residual = residual;
      best = x;
    }
    if (residual <= opt.tolerance) break;
    // lambda sigma_j can transiently exceed f_bar_j; clamp into the invertible range
    const Eigen::VectorXd target = inverse_outflow(network, demand.cwiseMax(0.0).cwiseMin(fbar));
    const Eigen::VectorXd next = (1.0 - opt.damping) * x + opt.damping * target;
    const double step = (next - x).norm() / std::max(1e-300, x.norm());
    x = next;
    if (step <= 1e-16) break;
  }
  if (best_residual <= opt.tolerance) {
    auto res = package(network, signal, eta, best, SolveMethod::FixedPoint, it);
    res.converged = true;
    return res;
  }

  int newton_iterations = 0;
  const Eigen::VectorXd polished = newton(network, signal, eta, best, opt, newton_iterations);
  auto res = package(network, signal, eta, polished, SolveMethod::Newton, it + newton_iterations);
  if (res.residual > best_residual) {
    res = package(network, signal, eta, best, SolveMethod::FixedPoint, it);
  }
  res.converged = res.residual <= opt.acceptance;
  if (!res.converged) {
    throw SolverError("free-flow equilibrium did not converge (residual " +
                          std::to_string(res.residual) + ")",
                      res.x, res.residual);
  }
  return res;
}

EquilibriumResult solve_extended(const Network& network, const InformationSignal& signal,
                                 double eta, const ExtendedOptions& opt) {
  SystemState start = centroid_state(network);
  if (opt.start_x) start.x = *opt.start_x;
  IntegrationOptions io;
  io.t_end = opt.t_end;
  io.dt = opt.dt;
  io.stop_when_settled = true;
  io.settle_tolerance = opt.settle_tolerance;
  io.record_stride = std::numeric_limits<int>::max();

  // stiff signals (large eta times a steep u) can destabilise RK4; retry with smaller steps
  for (int attempt = 0;; ++attempt) {
    try {
      const Trajectory traj = integrate(start, network, signal, eta, io);
      auto res = package(network, signal, eta, traj.states.back().x, SolveMethod::Simulation,
                         static_cast<int>(std::lround(traj.times.back() / io.dt)));
      res.converged = traj.settled;
      return res;
    } catch (const DivergenceError&) {
      if (attempt >= 2) throw;
      io.dt /= 4.0;
    }
  }
}

UniquenessProbe multistart_uniqueness_probe(const Network& network,
                                            const InformationSignal& signal, double eta,
                                            std::size_t starts, std::uint64_t seed) {
  const Eigen::VectorXd xbar = network.critical_densities();
  std::vector<Eigen::VectorXd> initial(starts);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& x0 : initial) {
    x0.resize(xbar.size());
    for (Eigen::Index j = 0; j < xbar.size(); ++j) x0[j] = unit(rng) * xbar[j];
  }

  std::vector<std::optional<Eigen::VectorXd>> found(starts);
  parallel_for(starts, [&](std::size_t k) {
    FreeFlowOptions opt;
    opt.start = initial[k];
    try {
      found[k] = solve_free_flow(network, signal, eta, opt).x;
    } catch (const SolverError&) {
    }
  });

  UniquenessProbe probe;
  for (auto& x : found) {
    if (x) probe.equilibria.push_back(*x); else ++probe.failed;
  }
  probe.converged = probe.equilibria.size();
  for (std::size_t a = 0; a < probe.equilibria.size(); ++a) {
    for (std::size_t b = a + 1; b < probe.equilibria.size(); ++b) {
      probe.max_pairwise_distance = std::max(
          probe.max_pairwise_distance, (probe.equilibria[a] - probe.equilibria[b]).norm());
    }
  }
  return probe;
}

double total_travel_time(const Network& network, const Eigen::VectorXd& x) {
  double total = 0.0;
  for (std::size_t j = 0; j < network.size(); ++j) {
    if (!(x[j] >= 0.0)) throw DomainError("density must be nonnegative");
    total += outflow(network.path(j), x[j]) * travel_time(network.path(j), x[j]);
  }
  return total;
}

CongestionOnset find_congestion_onset(const Network& network, const InformationSignal& signal,
                                      double eta_min, double eta_max, int count,
                                      int bisection_iterations, const ExtendedOptions& options) {
  if (count < 2 || !(eta_min < eta_max)) throw std::invalid_argument("invalid eta grid");
  CongestionOnset onset;
  onset.grid.resize(count);
  for (int k = 0; k < count; ++k) {
    onset.grid[k] = eta_min + (eta_max - eta_min) * k / (count - 1);
  }
  std::vector<EquilibriumResult> coarse(count);
  parallel_for(count, [&](std::size_t k) {
    coarse[k] = solve_extended(network, signal, onset.grid[k], options);
  });
  onset.congested.resize(count);
  for (int k = 0; k < count; ++k) onset.congested[k] = !coarse[k].all_free_flow();

  const auto first = std::find(onset.congested.begin(), onset.congested.end(), true);
  if (first == onset.congested.end()) return onset;
  const auto k = first - onset.congested.begin();
  auto first_congested_path = [&](const EquilibriumResult& r) -> std::size_t {
    for (std::size_t j = 0; j < r.regime.size(); ++j) {
      if (r.regime[j] == Regime::Congested) return j;
    }
    return 0;
  };
  if (k == 0) {
    onset.eta = onset.grid[0];
    onset.path = first_congested_path(coarse[0]);
    return onset;
  }
  double lo = onset.grid[k - 1], hi = onset.grid[k];
  EquilibriumResult at_hi = coarse[k];
  for (int it = 0; it < bisection_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto res = solve_extended(network, signal, mid, options);
    if (res.all_free_flow()) {
      lo = mid;
    } else {
      hi = mid;
      at_hi = std::move(res);
    }
  }
  onset.eta = hi;
  onset.path = first_congested_path(at_hi);
  return onset;
}

void write_equilibrium_csv(std::ostream& out, const Network& network,
                           const EquilibriumResult& result) {
  out << "path,x_eq,r_eq,regime,f,tau\n" << std::setprecision(12);
  for (std::size_t j = 0; j < network.size(); ++j) {
    const double x = result.x[j];
    out << j + 1 << ',' << x << ',' << result.r[j] << ',' << to_string(result.regime[j]) << ','
        << outflow(network.path(j), x) << ',' << travel_time(network.path(j), x) << '\n';
  }
  out << "residual," << result.residual << '\n';
  out << "total_travel_time," << total_travel_time(network, result.x) << '\n';
}

}  // namespace infodesign
