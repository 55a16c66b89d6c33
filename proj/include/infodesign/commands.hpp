#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "infodesign/design.hpp"
#include "infodesign/dynamics.hpp"
#include "infodesign/equilibrium.hpp"
#include "infodesign/infosignal.hpp"
#include "infodesign/scenario.hpp"

namespace infodesign {

struct CommandContext {
  std::optional<std::string> out_dir;  // CSVs and plot stubs are written here when set
  std::optional<std::uint64_t> seed;   // overrides run/design seeds
};

ConditionReport cmd_check(const Scenario& scenario, std::ostream& out,
                          const CommandContext& ctx = {});

struct SimulationSummary {
  Trajectory trajectory;
  std::optional<EquilibriumResult> equilibrium;
  std::optional<double> distance;  // |(x, r)(t_end) - (x_eq, r_eq)|
  InvarianceReport invariance;
};

SimulationSummary cmd_simulate(const Scenario& scenario, std::ostream& out,
                               const CommandContext& ctx = {});

/// Free-flow solve, falling back to simulation on the extended domain.
EquilibriumResult solve_equilibrium(const Network& network, const InformationSignal& signal,
                                    double eta);

EquilibriumResult cmd_equilibrium(const Scenario& scenario, std::ostream& out,
                                  const CommandContext& ctx = {});

struct SweepRow {
  double param_value = 0.0;
  std::size_t path = 0;  // 1-based
  double x_eq = 0.0;
  double r_eq = 0.0;
  std::string regime;
  double total_tt = 0.0;
  double cred_err = 0.0;
  std::string status;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;  // ordered by parameter value, then path
  std::optional<CongestionOnset> onset;
};

SweepOutcome cmd_sweep(const Scenario& scenario, const SweepSpec& sweep, std::ostream& out,
                       const CommandContext& ctx = {});

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// Inverse of write_sweep_csv; throws ConfigError on malformed rows.
std::vector<SweepRow> read_sweep_csv(std::istream& in);

DesignResult cmd_design(const Scenario& scenario, std::ostream& out,
                        const CommandContext& ctx = {});

/// |tau(x) - u(x)|.
double credibility_error(const Network& network, const InformationSignal& signal,
                         const Eigen::VectorXd& densities);

/// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace infodesign
