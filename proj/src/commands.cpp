#include "infodesign/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "infodesign/errors.hpp"
#include "infodesign/numerics.hpp"

namespace infodesign {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const CommandContext& ctx, const std::string& name) {
  fs::create_directories(*ctx.out_dir);
  const fs::path path = fs::path(*ctx.out_dir) / name;
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot write '" + path.string() + "'", 0);
  return file;
}

void write_plot_stub(const CommandContext& ctx, const std::string& name, const std::string& csv,
                     const std::string& body) {
  auto file = open_output(ctx, name);
  file << "import sys\n"
       << "import pandas as pd\n"
       << "import matplotlib.pyplot as plt\n\n"
       << "df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else \"" << csv << "\")\n"
       << body << "plt.tight_layout()\nplt.show()\n";
}

std::string join(const Eigen::VectorXd& v) {
  std::ostringstream s;
  s << std::setprecision(8);
  for (Eigen::Index j = 0; j < v.size(); ++j) s << (j ? " " : "") << v[j];
  return s.str();
}

void print_report(std::ostream& out, const ConditionReport& r) {
  out << std::setprecision(6);
  out << "path  existence_margin  necessity_margin\n";
  for (Eigen::Index j = 0; j < r.existence.log_margin.size(); ++j) {
    out << std::setw(4) << j + 1 << "  " << std::setw(16) << r.existence.log_margin[j] << "  "
        << std::setw(16) << r.necessity.log_margin[j] << '\n';
  }
  out << "existence: " << (r.existence.ok ? "pass" : "fail") << '\n';
  out << "necessity: " << (r.necessity.ok ? "pass" : "fail") << '\n';
  out << "l_M = " << r.uniqueness.max_derivative << " vs 2 mu_m/(lambda eta) = "
      << r.uniqueness.threshold << " (" << to_string(r.uniqueness.status) << ")\n";
  out << "verdict: " << to_string(r.verdict) << '\n';
}

void write_report_csv(std::ostream& out, const ConditionReport& r) {
  out << std::setprecision(12);
  out << "path,existence_value,existence_log_margin,necessity_value,necessity_log_margin\n";
  for (Eigen::Index j = 0; j < r.existence.value.size(); ++j) {
    out << j + 1 << ',' << r.existence.value[j] << ',' << r.existence.log_margin[j] << ','
        << r.necessity.value[j] << ',' << r.necessity.log_margin[j] << '\n';
  }
  out << "max_derivative," << r.uniqueness.max_derivative << '\n';
  out << "threshold," << r.uniqueness.threshold << '\n';
  out << "uniqueness," << to_string(r.uniqueness.status) << '\n';
  out << "verdict," << to_string(r.verdict) << '\n';
}

DesignProblem design_problem(const Scenario& sc, const Network& net, const CommandContext& ctx) {
  DesignProblem problem{net, sc.run.eta, sc.design.gamma, {}};
  problem.options.starts = sc.design.starts;
  problem.options.evaluations = sc.design.evaluations;
  problem.options.seed = ctx.seed.value_or(sc.design.seed);
  return problem;
}

std::vector<SweepRow> failed_rows(double value, std::size_t p, const std::string& status) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepRow> rows;
  for (std::size_t j = 0; j < p; ++j) rows.push_back({value, j + 1, nan, nan, "", nan, nan, status});
  return rows;
}

std::vector<SweepRow> point_rows(double value, const Network& net, const InformationSignal& signal,
                                 const EquilibriumResult& eq) {
  const double tt = total_travel_time(net, eq.x);
  const double cred = credibility_error(net, signal, eq.x);
  const std::string status = eq.converged ? "ok" : "not_settled";
  std::vector<SweepRow> rows;
  for (std::size_t j = 0; j < net.size(); ++j) {
    rows.push_back({value, j + 1, eq.x[j], eq.r[j], std::string(to_string(eq.regime[j])), tt, cred, status});
  }
  return rows;
}

}  // namespace

double credibility_error(const Network& network, const InformationSignal& signal,
                         const Eigen::VectorXd& x) {
  return (travel_times(network, x) - evaluate(signal, network, x)).norm();
}

ConditionReport cmd_check(const Scenario& sc, std::ostream& out, const CommandContext& ctx) {
  const Network net = sc.network();
  const InformationSignal signal = sc.build_signal(net);
  const ConditionReport report = check_class_U(signal, net, sc.run.eta);
  print_report(out, report);
  if (ctx.out_dir) {
    auto file = open_output(ctx, "check.csv");
    write_report_csv(file, report);
  }
  return report;
}

EquilibriumResult solve_equilibrium(const Network& net, const InformationSignal& signal,
                                    double eta) {
  try {
    return solve_free_flow(net, signal, eta);
  } catch (const SolverError&) {
    return solve_extended(net, signal, eta);
  }
}

SimulationSummary cmd_simulate(const Scenario& sc, std::ostream& out, const CommandContext& ctx) {
  const Network net = sc.network();
  const InformationSignal signal = sc.build_signal(net);
  Scenario seeded = sc;
  if (ctx.seed) {
    seeded.run.initial = InitialKind::Random;
    seeded.run.seed = *ctx.seed;
  }
  const SystemState start = seeded.initial_state(net);

  SimulationSummary summary;
  try {
    summary.equilibrium = solve_equilibrium(net, signal, sc.run.eta);
  } catch (const std::runtime_error& e) {
    out << "equilibrium unavailable: " << e.what() << '\n';
  }
  std::optional<SystemState> reference;
  if (summary.equilibrium) reference = SystemState{summary.equilibrium->x, summary.equilibrium->r};

  IntegrationOptions io;
  io.t_end = sc.run.t_end;
  io.dt = sc.run.dt;
  summary.trajectory = integrate(start, net, signal, sc.run.eta, io, reference);
  summary.invariance = check_invariance(summary.trajectory, net);

  const SystemState& last = summary.trajectory.states.back();
  out << std::setprecision(8);
  out << "t = " << summary.trajectory.times.back() << '\n';
  out << "x = " << join(last.x) << '\n';
  out << "r = " << join(last.r) << '\n';
  if (reference) {
    summary.distance = std::sqrt((last.x - reference->x).squaredNorm() +
                                 (last.r - reference->r).squaredNorm());
    out << "x_eq = " << join(reference->x) << '\n';
    out << "distance_to_equilibrium = " << *summary.distance << '\n';
  }
  out << "max_simplex_drift = " << summary.trajectory.max_simplex_drift << '\n';
  out << "invariance_samples = " << summary.invariance.samples << '\n';
  out << "invariance_violations = " << summary.invariance.violations() << '\n';
  if (summary.invariance.first_violation_time) {
    out << "first_violation_time = " << *summary.invariance.first_violation_time << '\n';
  }

  if (ctx.out_dir) {
    auto file = open_output(ctx, "trajectory.csv");
    write_trajectory_csv(file, summary.trajectory);
    write_plot_stub(ctx, "plot_trajectory.py", "trajectory.csv",
                    "fig, axes = plt.subplots(2, 1, sharex=True)\n"
                    "for c in df.columns:\n"
                    "    if c.startswith(\"x_\"):\n"
                    "        axes[0].plot(df[\"t\"], df[c], label=c)\n"
                    "    elif c.startswith(\"r_\"):\n"
                    "        axes[1].plot(df[\"t\"], df[c], label=c)\n"
                    "axes[0].set_ylabel(\"density\")\n"
                    "axes[1].set_ylabel(\"routing ratio\")\n"
                    "axes[1].set_xlabel(\"t\")\n"
                    "axes[0].legend()\n"
                    "axes[1].legend()\n");
  }
  return summary;
}

EquilibriumResult cmd_equilibrium(const Scenario& sc, std::ostream& out, const CommandContext& ctx) {
  const Network net = sc.network();
  const InformationSignal signal = sc.build_signal(net);
  EquilibriumResult eq = solve_equilibrium(net, signal, sc.run.eta);
  if (!eq.converged) {
    throw SolverError("simulation did not settle to an equilibrium", eq.x, eq.residual);
  }
  write_equilibrium_csv(out, net, eq);
  out << "method," << to_string(eq.method) << '\n';
  if (ctx.out_dir) {
    auto file = open_output(ctx, "equilibrium.csv");
    write_equilibrium_csv(file, net, eq);
  }
  return eq;
}

SweepOutcome cmd_sweep(const Scenario& sc, const SweepSpec& sweep, std::ostream& out,
                       const CommandContext& ctx) {
  if (sweep.values.size() < 2) throw ConfigError("a sweep needs at least two values", 0);
  if (sweep.param == SweepParam::Gamma && sweep.task == SweepTask::Equilibrium) {
    throw ConfigError("a gamma sweep only makes sense with the design task", 0);
  }
  const Network net = sc.network();
  const InformationSignal scenario_signal = sc.build_signal(net);
  const std::size_t p = net.size();

  std::vector<std::vector<SweepRow>> per_point(sweep.values.size());
  parallel_for(sweep.values.size(), [&](std::size_t k) {
    const double value = sweep.values[k];
    const double eta = sweep.param == SweepParam::Eta ? value : sc.run.eta;
    try {
      if (sweep.task == SweepTask::Equilibrium) {
        per_point[k] = point_rows(value, net, scenario_signal, solve_extended(net, scenario_signal, eta));
      } else {
        DesignProblem problem = design_problem(sc, net, ctx);
        problem.eta = eta;
        if (sweep.param == SweepParam::Gamma) problem.gamma = value;
        // the multistart already runs on this worker; nested pools would oversubscribe
        problem.options.workers = 1;
        const DesignResult design = optimize(problem);
        const InformationSignal signal = design.signal(net);
        FreeFlowOptions ff;
        ff.start = design.target;
        per_point[k] = point_rows(value, net, signal, solve_free_flow(net, signal, eta, ff));
      }
    } catch (const DesignFailure&) {
      per_point[k] = failed_rows(value, p, "design_failed");
    } catch (const DivergenceError&) {
      per_point[k] = failed_rows(value, p, "diverged");
    } catch (const SolverError&) {
      per_point[k] = failed_rows(value, p, "solver_failed");
    } catch (const std::invalid_argument&) {
      per_point[k] = failed_rows(value, p, "invalid");
    }
  });

  SweepOutcome outcome;
  for (auto& rows : per_point) {
    for (auto& row : rows) outcome.rows.push_back(std::move(row));
  }

  if (sweep.param == SweepParam::Eta && sweep.task == SweepTask::Equilibrium &&
      scenario_signal.kind() == InformationSignal::Kind::TrueTravelTime) {
    outcome.onset = find_congestion_onset(net, scenario_signal, sweep.values.front(),
                                          sweep.values.back(),
                                          static_cast<int>(sweep.values.size()));
  }

  write_sweep_csv(out, outcome.rows);
  if (outcome.onset) {
    if (outcome.onset->eta) {
      out << std::setprecision(8) << "# congestion onset: eta = " << *outcome.onset->eta
          << " on path " << *outcome.onset->path + 1 << '\n';
    } else {
      out << "# no congestion on the grid\n";
    }
  }

  if (ctx.out_dir) {
    auto file = open_output(ctx, "sweep.csv");
    write_sweep_csv(file, outcome.rows);
    if (outcome.onset) {
      auto onset = open_output(ctx, "onset.txt");
      onset << std::setprecision(12);
      if (outcome.onset->eta) {
        onset << "eta = " << *outcome.onset->eta << "\npath = " << *outcome.onset->path + 1 << '\n';
      } else {
        onset << "eta = none\n";
      }
    }
    write_plot_stub(ctx, "plot_sweep.py", "sweep.csv",
                    "fig, axes = plt.subplots(2, 1, sharex=True)\n"
                    "for path, g in df.groupby(\"path\"):\n"
                    "    axes[0].plot(g[\"param_value\"], g[\"x_eq\"], label=f\"path {path}\")\n"
                    "tt = df.groupby(\"param_value\")[[\"total_tt\", \"cred_err\"]].first()\n"
                    "axes[1].plot(tt.index, tt[\"total_tt\"], label=\"total travel time\")\n"
                    "axes[1].plot(tt.index, tt[\"cred_err\"], label=\"credibility error\")\n"
                    "axes[0].set_ylabel(\"x_eq\")\n"
                    "axes[1].set_xlabel(\"param_value\")\n"
                    "axes[0].legend()\n"
                    "axes[1].legend()\n");
  }
  return outcome;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "param_value,path,x_eq,r_eq,regime,total_tt,cred_err,status\n";
  std::ostringstream s;
  s << std::setprecision(12);
  for (const auto& r : rows) {
    s << r.param_value << ',' << r.path << ',' << r.x_eq << ',' << r.r_eq << ',' << r.regime << ','
      << r.total_tt << ',' << r.cred_err << ',' << r.status << '\n';
  }
  out << s.str();
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "param_value,path,x_eq,r_eq,regime,total_tt,cred_err,status") {
    throw ConfigError("not a sweep CSV", 1);
  }
  auto number = [](const std::string& s, int l) {
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("bad number '" + s + "'", l);
  };
  std::vector<SweepRow> rows;
  int l = 1;
  while (std::getline(in, line)) {
    ++l;
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 8) throw ConfigError("expected 8 columns", l);
    SweepRow r;
    r.param_value = number(f[0], l);
    r.path = static_cast<std::size_t>(number(f[1], l));
    r.x_eq = number(f[2], l);
    r.r_eq = number(f[3], l);
    r.regime = f[4];
    r.total_tt = number(f[5], l);
    r.cred_err = number(f[6], l);
    r.status = f[7];
    rows.push_back(std::move(r));
  }
  return rows;
}

DesignResult cmd_design(const Scenario& sc, std::ostream& out, const CommandContext& ctx) {
  const Network net = sc.network();
  const DesignProblem problem = design_problem(sc, net, ctx);
  const DesignResult result = optimize(problem);
  write_design_result(out, net, problem.eta, problem.gamma, result);

  // re-verify the exported signal from scratch
  Scenario designed = sc;
  designed.signal = SignalSpec{};
  designed.signal.kind = InformationSignal::Kind::Affine;
  designed.signal.a.assign(result.slopes.data(), result.slopes.data() + result.slopes.size());
  designed.signal.b.assign(result.offsets.data(), result.offsets.data() + result.offsets.size());
  out << "-- check --\n";
  CommandContext check_ctx = ctx;
  cmd_check(designed, out, check_ctx);

  if (ctx.out_dir) {
    auto text = open_output(ctx, "design.txt");
    write_design_result(text, net, problem.eta, problem.gamma, result);
    auto csv = open_output(ctx, "design.csv");
    csv << design_csv_header(net.size()) << '\n'
        << design_csv_row(problem.eta, problem.gamma, result) << '\n';
    auto scenario = open_output(ctx, "designed_scenario.ini");
    write_scenario(scenario, designed);
  }
  return result;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic information design on parallel-path networks", "infodesign"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir, grid, param, task;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
    cmd->add_option("--out", out_dir, "Output directory for CSVs and plot scripts");
    cmd->add_option("--seed", seed, "Seed override");
  };
  auto* check = app.add_subcommand("check", "Verify the signal against the class conditions");
  auto* simulate = app.add_subcommand("simulate", "Integrate the coupled dynamics");
  auto* equilibrium = app.add_subcommand("equilibrium", "Solve for the equilibrium");
  auto* sweep = app.add_subcommand("sweep", "Sweep eta or gamma");
  auto* design = app.add_subcommand("design", "Optimize an affine signal");
  for (auto* cmd : {check, simulate, equilibrium, sweep, design}) add_common(cmd);
  sweep->add_option("--param", param, "Swept parameter")
      ->required()
      ->check(CLI::IsMember({"eta", "gamma"}));
  sweep->add_option("--grid", grid, "min:max:count")->required();
  sweep->add_option("--task", task, "Per-point task")->check(CLI::IsMember({"equilibrium", "design"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  CommandContext ctx;
  if (!out_dir.empty()) ctx.out_dir = out_dir;
  for (auto* cmd : {check, simulate, equilibrium, sweep, design}) {
    if (cmd->parsed() && cmd->count("--seed") > 0) ctx.seed = seed;
  }

  try {
    const Scenario sc = load_scenario(scenario_path);
    if (check->parsed()) {
      cmd_check(sc, out, ctx);
    } else if (simulate->parsed()) {
      cmd_simulate(sc, out, ctx);
    } else if (equilibrium->parsed()) {
      cmd_equilibrium(sc, out, ctx);
    } else if (design->parsed()) {
      cmd_design(sc, out, ctx);
    } else {
      SweepSpec spec;
      spec.param = param == "gamma" ? SweepParam::Gamma : SweepParam::Eta;
      spec.values = parse_grid(grid);
      if (task.empty()) {
        spec.task = spec.param == SweepParam::Gamma ? SweepTask::Design : SweepTask::Equilibrium;
      } else {
        spec.task = task == "design" ? SweepTask::Design : SweepTask::Equilibrium;
      }
      cmd_sweep(sc, spec, out, ctx);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    err << "diverged at t = " << e.time() << ": " << e.what() << '\n';
    return 2;
  } catch (const DesignFailure& e) {
    err << "design failed: " << e.what() << " (least violation " << e.violation() << ")\n";
    return 2;
  } catch (const SolverError& e) {
    err << "solver failed: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace infodesign
