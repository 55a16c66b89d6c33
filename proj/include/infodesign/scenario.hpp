#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "infodesign/dynamics.hpp"
#include "infodesign/infosignal.hpp"
#include "infodesign/model.hpp"

namespace infodesign {

// Scenario files are flat INI-style text:
//
//   [network]          inflow
//   [path]             kind + kind parameters, free_flow_time, theta, delta (one section per path)
//   [signal]           kind = affine (a, b) | true_travel_time | piecewise_linear (knots_j, derivative_bounds)
//   [run]              eta, t_end, dt, initial = centroid | random:<seed> | explicit (initial_x, initial_r)
//   [design]           gamma, starts, evaluations, seed
//
// Vectors are whitespace separated; knots are `density:value` pairs; `#` starts a comment.

struct PathSpec {
  DiagramKind kind = DiagramKind::CappedLinear;
  double critical_density = 0.0;
  double critical_flow = 0.0;     // greenshields, triangular
  double slope = 0.0;             // capped_linear
  double wave_speed = 0.0;        // triangular
  double saturation_flow = 0.0;   // exponential
  double rate = 0.0;              // exponential
  BprParams bpr{};

  Path build() const;
  bool operator==(const PathSpec& o) const;
};

struct SignalSpec {
  InformationSignal::Kind kind = InformationSignal::Kind::TrueTravelTime;
  std::vector<double> a, b;
  std::vector<std::vector<std::pair<double, double>>> knots;
  std::vector<double> derivative_bounds;
  bool operator==(const SignalSpec&) const = default;
};

enum class InitialKind { Centroid, Random, Explicit };

struct RunSpec {
  double eta = 1.0;
  double t_end = 50.0;
  double dt = 0.01;
  InitialKind initial = InitialKind::Centroid;
  std::uint64_t seed = 1;
  std::vector<double> initial_x, initial_r;
  bool operator==(const RunSpec&) const = default;
};

struct DesignSpec {
  double gamma = 0.0;
  int starts = 20;
  int evaluations = 5000;
  std::uint64_t seed = 1;
  bool operator==(const DesignSpec&) const = default;
};

struct Scenario {
  double inflow = 1.0;
  std::vector<PathSpec> paths;
  SignalSpec signal;
  RunSpec run;
  DesignSpec design;

  Network network() const;
  InformationSignal build_signal(const Network& network) const;
  SystemState initial_state(const Network& network) const;
  bool operator==(const Scenario&) const = default;
};

/// Throws ConfigError with the offending line on malformed input.
Scenario parse_scenario(std::istream& in);
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
void write_scenario(std::ostream& out, const Scenario& scenario);

/// Builds the network and signal once, converting invariant violations into ConfigError.
void validate(const Scenario& scenario);

enum class SweepParam { Eta, Gamma };
enum class SweepTask { Equilibrium, Design };

struct SweepSpec {
  SweepParam param = SweepParam::Eta;
  std::vector<double> values;
  SweepTask task = SweepTask::Equilibrium;
};

/// "min:max:count" with count >= 2 and min < max.
std::vector<double> parse_grid(const std::string& text);

}  // namespace infodesign
