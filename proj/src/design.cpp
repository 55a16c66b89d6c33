#include "infodesign/design.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "infodesign/choice.hpp"
#include "infodesign/errors.hpp"
#include "infodesign/numerics.hpp"

namespace infodesign {

namespace {

// Integral of tau over [0, x_bar].
double travel_time_integral(const Path& path) {
  const auto& bpr = path.bpr();
  const double xc = path.critical_density();
  return bpr.free_flow_time * xc * (1.0 + bpr.theta / (bpr.delta + 1.0));
}

// Shift c minimising sum_j int (a_j y + base_j + c - tau_j(y))^2 dy.
double optimal_shift(const Network& network, const Eigen::VectorXd& slopes,
                     const Eigen::VectorXd& base) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < network.size(); ++j) {
    const double xc = network.path(j).critical_density();
    num += travel_time_integral(network.path(j)) - 0.5 * slopes[j] * xc * xc - base[j] * xc;
    den += xc;
  }
  return num / den;
}

// Offsets before the shift: -(1/eta) ln(q_j / lambda) - a_j x*_j.
Eigen::VectorXd unshifted_offsets(const Eigen::VectorXd& flows, const Eigen::VectorXd& slopes,
                                  const Eigen::VectorXd& target, double lambda, double eta) {
  return (-(flows.array() / lambda).log() / eta).matrix() - slopes.cwiseProduct(target);
}

double total_credibility(const Network& network, const Eigen::VectorXd& a,
                         const Eigen::VectorXd& b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < network.size(); ++j) {
    sum += credibility_penalty(network.path(j), a[j], b[j]);
  }
  return sum;
}

// Squared log-margin shortfall corresponding to the 1e-12 existence tolerance.
constexpr double kFeasibleViolation = 1e-24;

struct Candidate {
  Eigen::VectorXd flows, slopes, offsets, target;
  double shift = 0.0;
  double efficiency = 0.0, credibility = 0.0, objective = 0.0;
  double violation = 0.0;
  double penalised = 0.0;
};

class Evaluator {
 public:
  explicit Evaluator(const DesignProblem& problem)
      : net_(problem.network),
        eta_(problem.eta),
        gamma_(problem.gamma),
        p_(static_cast<Eigen::Index>(net_.size())),
        lambda_(net_.inflow()),
        slope_cap_(2.0 * monotonicity_modulus(net_) / (lambda_ * eta_)),
        lower_(Eigen::VectorXd::Constant(p_, problem.options.flow_floor * lambda_)),
        upper_(net_.critical_flows()) {}

  Eigen::Index dimension() const { return 2 * p_; }
  double slope_cap() const { return slope_cap_; }
  const Eigen::VectorXd& flow_lower() const { return lower_; }
  const Eigen::VectorXd& flow_upper() const { return upper_; }

  Candidate evaluate(const Eigen::VectorXd& v, double weight) const {
    Candidate c;
    const Eigen::VectorXd raw_flows = v.head(p_);
    const Eigen::VectorXd raw_slopes = v.tail(p_);
    c.flows = project_capped_simplex(raw_flows, lower_, upper_, lambda_);
    c.slopes = raw_slopes.cwiseMax(-slope_cap_).cwiseMin(slope_cap_);
    c.target = inverse_outflow(net_, c.flows);
    const Eigen::VectorXd base = unshifted_offsets(c.flows, c.slopes, c.target, lambda_, eta_);
    c.shift = optimal_shift(net_, c.slopes, base);
    c.offsets = base.array() + c.shift;

    c.efficiency = c.flows.dot(travel_times(net_, c.target));
    c.credibility = total_credibility(net_, c.slopes, c.offsets);
    c.objective = c.efficiency + gamma_ * c.credibility;

    const SignalBounds sb = affine_bounds(net_, c.slopes, c.offsets);
    const ExistenceCheck ex = check_existence(sb, net_, eta_);
    c.violation = ex.log_margin.cwiseMin(0.0).squaredNorm() + sb.lower.cwiseMin(0.0).squaredNorm();

    // keeps the simplex near the feasible box where the projections are not flat
    const double drift = (raw_flows - c.flows).squaredNorm() + (raw_slopes - c.slopes).squaredNorm();
    c.penalised = c.objective + weight * c.violation + 1e-3 * drift;
    return c;
  }

  Eigen::VectorXd random_start(std::mt19937_64& rng) const {
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd w(p_);
    for (Eigen::Index j = 0; j < p_; ++j) w[j] = expo(rng);
    Eigen::VectorXd v(2 * p_);
    v.head(p_) = project_capped_simplex(lambda_ * w / w.sum(), lower_, upper_, lambda_);
    for (Eigen::Index j = 0; j < p_; ++j) v[p_ + j] = slope_cap_ * unit(rng);
    return v;
  }

 private:
  const Network& net_;
  double eta_, gamma_;
  Eigen::Index p_;
  double lambda_, slope_cap_;
  Eigen::VectorXd lower_, upper_;
};

}  // namespace

double credibility_penalty(const Path& path, double a, double b) {
  // (a y + c0 - k y^delta)^2 with k x_bar^delta = t0 theta, integrated term by term
  const auto& bpr = path.bpr();
  const double xc = path.critical_density();
  const double d = bpr.delta;
  const double c0 = b - bpr.free_flow_time;
  const double peak = bpr.free_flow_time * bpr.theta;
  return a * a * xc * xc * xc / 3.0 + a * c0 * xc * xc + c0 * c0 * xc -
         2.0 * a * peak * xc * xc / (d + 2.0) - 2.0 * c0 * peak * xc / (d + 1.0) +
         peak * peak * xc / (2.0 * d + 1.0);
}

double credibility_penalty_quadrature(const Path& path, double a, double b) {
  return integrate(
      [&](double y) {
        const double e = a * y + b - travel_time(path, y);
        return e * e;
      },
      0.0, path.critical_density(), 32);
}

FeasibleOffsets feasible_b_from_target(const Network& network, double eta,
                                       const Eigen::VectorXd& target,
                                       const Eigen::VectorXd& slopes,
                                       const TargetOptions& options) {
  if (!(eta > 0.0)) throw std::invalid_argument("softmax inversion needs eta > 0");
  if (target.size() != static_cast<Eigen::Index>(network.size()) || slopes.size() != target.size()) {
    throw std::invalid_argument("target and slopes must have one entry per path");
  }
  const double lambda = network.inflow();
  Eigen::VectorXd flows = outflow(network, target);
  if (std::abs(flows.sum() - lambda) > options.sum_tolerance * lambda) {
    throw InfeasibleTarget("target flows sum to " + std::to_string(flows.sum()) +
                               ", inflow is " + std::to_string(lambda),
                           false);
  }
  FeasibleOffsets out;
  out.floored.assign(network.size(), false);
  const double floor = options.flow_floor * lambda;
  for (Eigen::Index j = 0; j < flows.size(); ++j) {
    if (flows[j] <= 0.0 && !options.floor_zero_flows) {
      throw InfeasibleTarget("path " + std::to_string(j + 1) +
                                 " has zero target flow; a softmax share cannot vanish",
                             true);
    }
    if (flows[j] < floor) {
      flows[j] = floor;
      out.floored[j] = true;
    }
  }
  const Eigen::VectorXd base = unshifted_offsets(flows, slopes, target, lambda, eta);
  out.shift = optimal_shift(network, slopes, base);
  out.offsets = base.array() + out.shift;
  return out;
}

double design_objective(const Network& network, double gamma, const Eigen::VectorXd& a,
                        const Eigen::VectorXd& b, const Eigen::VectorXd& target) {
  return total_travel_time(network, target) + gamma * total_credibility(network, a, b);
}

InformationSignal DesignResult::signal(const Network& network) const {
  return InformationSignal::affine(network, slopes, offsets);
}

DesignResult optimize(const DesignProblem& problem) {
  if (!(problem.eta > 0.0)) throw std::invalid_argument("design needs eta > 0");
  if (!(problem.gamma >= 0.0)) throw std::invalid_argument("gamma must be nonnegative");
  const auto& opt = problem.options;
  if (opt.starts < 1 || opt.evaluations < 1 || opt.penalty_weights.empty()) {
    throw std::invalid_argument("invalid design options");
  }
  const Network& net = problem.network;
  const Evaluator evaluator(problem);
  if (evaluator.flow_lower().sum() > net.inflow() || evaluator.flow_upper().sum() < net.inflow()) {
    throw DesignFailure("inflow exceeds the total free-flow capacity", {}, {}, {},
                        std::numeric_limits<double>::infinity());
  }

  struct StartOutcome {
    Candidate best;
    double initial_penalised = 0.0;
  };
  std::vector<StartOutcome> outcomes(opt.starts);
  const int rounds = static_cast<int>(opt.penalty_weights.size());

  parallel_for(
      opt.starts,
      [&](std::size_t k) {
        std::mt19937_64 rng(opt.seed * 1000003ULL + k);
        Eigen::VectorXd v = evaluator.random_start(rng);
        const double final_weight = opt.penalty_weights.back();
        outcomes[k].initial_penalised = evaluator.evaluate(v, final_weight).penalised;
        NelderMeadOptions nm;
        nm.initial_step = 0.05;
        nm.max_evaluations = std::max(1, opt.evaluations / rounds);
        for (double weight : opt.penalty_weights) {
          auto res = nelder_mead([&](const Eigen::VectorXd& y) { return evaluator.evaluate(y, weight).penalised; },
                                 v, nm);
          v = res.x;
          nm.initial_step = 0.01;
        }
        outcomes[k].best = evaluator.evaluate(v, final_weight);
      },
      opt.workers);

  const Candidate* chosen = nullptr;
  const Candidate* least_infeasible = nullptr;
  for (const auto& o : outcomes) {
    const Candidate& c = o.best;
    if (c.violation <= kFeasibleViolation) {
      if (!chosen || c.objective < chosen->objective) chosen = &c;
    }
    if (!least_infeasible || c.violation < least_infeasible->violation) least_infeasible = &c;
  }
  if (!chosen) {
    throw DesignFailure("no feasible design found", least_infeasible->slopes,
                        least_infeasible->offsets, least_infeasible->target,
                        least_infeasible->violation);
  }

  DesignResult result;
  result.slopes = chosen->slopes;
  result.offsets = chosen->offsets;
  result.target = chosen->target;
  result.routing = chosen->flows / net.inflow();
  result.shift = chosen->shift;
  result.efficiency = chosen->efficiency;
  result.credibility = chosen->credibility;
  result.objective = chosen->objective;
  result.best_penalised = chosen->penalised;
  for (const auto& o : outcomes) result.start_objectives.push_back(o.initial_penalised);

  const InformationSignal signal = result.signal(net);
  result.report = check_class_U(signal, net, problem.eta);
  result.equilibrium_residual = equilibrium_residual(net, signal, problem.eta, result.target);
  if (result.equilibrium_residual > opt.residual_tolerance) {
    throw DesignFailure("designed target is not an equilibrium of the designed signal",
                        result.slopes, result.offsets, result.target, result.equilibrium_residual);
  }
  try {
    const auto eq = solve_free_flow(net, signal, problem.eta);
    result.roundtrip_distance = (eq.x - result.target).norm();
  } catch (const SolverError& e) {
    result.roundtrip_distance = (e.best_iterate() - result.target).norm();
  }
  return result;
}

std::vector<GammaPoint> gamma_sweep(const DesignProblem& problem,
                                    const std::vector<double>& gammas) {
  std::vector<GammaPoint> out;
  out.reserve(gammas.size());
  for (double gamma : gammas) {
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma values must be nonnegative");
    DesignProblem p = problem;
    p.gamma = gamma;
    GammaPoint point;
    point.gamma = gamma;
    point.design = optimize(p);
    const InformationSignal signal = point.design.signal(p.network);
    FreeFlowOptions ff;
    ff.start = point.design.target;
    point.equilibrium = solve_free_flow(p.network, signal, p.eta, ff);
    point.total_travel_time = total_travel_time(p.network, point.equilibrium.x);
    point.credibility_error = (travel_times(p.network, point.equilibrium.x) -
                               evaluate(signal, p.network, point.equilibrium.x))
                                  .norm();
    out.push_back(std::move(point));
  }
  return out;
}

namespace {

void write_vector(std::ostream& out, const char* key, const Eigen::VectorXd& v) {
  out << key << " =";
  for (Eigen::Index j = 0; j < v.size(); ++j) out << ' ' << v[j];
  out << '\n';
}

}  // namespace

void write_design_result(std::ostream& out, const Network& network, double eta, double gamma,
                         const DesignResult& r) {
  out << std::setprecision(10);
  out << "eta = " << eta << '\n' << "gamma = " << gamma << '\n';
  write_vector(out, "a", r.slopes);
  write_vector(out, "b", r.offsets);
  write_vector(out, "x_star", r.target);
  write_vector(out, "r_star", r.routing);
  out << "shift = " << r.shift << '\n';
  out << "efficiency = " << r.efficiency << '\n';
  out << "credibility = " << r.credibility << '\n';
  out << "objective = " << r.objective << '\n';
  out << "equilibrium_residual = " << r.equilibrium_residual << '\n';
  out << "roundtrip_distance = " << r.roundtrip_distance << '\n';
  write_vector(out, "existence_log_margin", r.report.existence.log_margin);
  write_vector(out, "necessity_log_margin", r.report.necessity.log_margin);
  out << "max_derivative = " << r.report.uniqueness.max_derivative << '\n';
  out << "derivative_threshold = " << r.report.uniqueness.threshold << '\n';
  out << "uniqueness_status = " << to_string(r.report.uniqueness.status) << '\n';
  out << "verdict = " << to_string(r.report.verdict) << '\n';
  out << "paths = " << network.size() << '\n';
}

std::string design_csv_header(std::size_t p) {
  std::ostringstream s;
  s << "eta,gamma,objective,efficiency,credibility,verdict";
  for (std::size_t j = 1; j <= p; ++j) s << ",a_" << j;
  for (std::size_t j = 1; j <= p; ++j) s << ",b_" << j;
  for (std::size_t j = 1; j <= p; ++j) s << ",x_star_" << j;
  return s.str();
}

std::string design_csv_row(double eta, double gamma, const DesignResult& r) {
  std::ostringstream s;
  s << std::setprecision(12) << eta << ',' << gamma << ',' << r.objective << ',' << r.efficiency
    << ',' << r.credibility << ',' << to_string(r.report.verdict);
  for (Eigen::Index j = 0; j < r.slopes.size(); ++j) s << ',' << r.slopes[j];
  for (Eigen::Index j = 0; j < r.offsets.size(); ++j) s << ',' << r.offsets[j];
  for (Eigen::Index j = 0; j < r.target.size(); ++j) s << ',' << r.target[j];
  return s.str();
}

}  // namespace infodesign
