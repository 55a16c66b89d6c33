#include "infodesign/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "infodesign/errors.hpp"

namespace infodesign {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, int line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + text + "'", line);
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw ConfigError("expected a number, got '" + text + "'", line);
  }
  return value;
}

std::uint64_t parse_unsigned(const std::string& text, int line) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError("expected a nonnegative integer, got '" + text + "'", line);
  }
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError("integer out of range: '" + text + "'", line);
  }
}

int parse_positive_int(const std::string& text, int line) {
  const auto v = parse_unsigned(text, line);
  if (v < 1 || v > 100000000) throw ConfigError("expected a positive integer, got '" + text + "'", line);
  return static_cast<int>(v);
}

std::vector<double> parse_vector(const std::string& text, int line) {
  std::istringstream ss(text);
  std::vector<double> out;
  for (std::string tok; ss >> tok;) out.push_back(parse_double(tok, line));
  if (out.empty()) throw ConfigError("expected at least one number", line);
  return out;
}

std::vector<std::pair<double, double>> parse_knots(const std::string& text, int line) {
  std::istringstream ss(text);
  std::vector<std::pair<double, double>> out;
  for (std::string tok; ss >> tok;) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw ConfigError("knot '" + tok + "' is not density:value", line);
    out.emplace_back(parse_double(tok.substr(0, colon), line), parse_double(tok.substr(colon + 1), line));
  }
  if (out.size() < 2) throw ConfigError("a piecewise-linear map needs at least two knots", line);
  return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void write_vector(std::ostream& out, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
}

using Handler = std::function<void(const std::string&, int)>;

}  // namespace

Path PathSpec::build() const {
  switch (kind) {
    case DiagramKind::Greenshields:
      return Path(FundamentalDiagram::greenshields(critical_density, critical_flow), bpr);
    case DiagramKind::Triangular:
      return Path(FundamentalDiagram::triangular(critical_density, critical_flow, wave_speed), bpr);
    case DiagramKind::Exponential:
      return Path(FundamentalDiagram::exponential(saturation_flow, rate, critical_density), bpr);
    case DiagramKind::CappedLinear:
      return Path(FundamentalDiagram::capped_linear(slope, critical_density), bpr);
  }
  throw std::invalid_argument("unknown diagram kind");
}

bool PathSpec::operator==(const PathSpec& o) const {
  return kind == o.kind && critical_density == o.critical_density &&
         critical_flow == o.critical_flow && slope == o.slope && wave_speed == o.wave_speed &&
         saturation_flow == o.saturation_flow && rate == o.rate &&
         bpr.free_flow_time == o.bpr.free_flow_time && bpr.theta == o.bpr.theta &&
         bpr.delta == o.bpr.delta;
}

Network Scenario::network() const {
  std::vector<Path> built;
  built.reserve(paths.size());
  for (const auto& p : paths) built.push_back(p.build());
  return Network(std::move(built), inflow);
}

InformationSignal Scenario::build_signal(const Network& net) const {
  const std::size_t p = net.size();
  switch (signal.kind) {
    case InformationSignal::Kind::TrueTravelTime:
      return InformationSignal::true_travel_time(net);
    case InformationSignal::Kind::Affine:
      if (signal.a.size() != p || signal.b.size() != p) {
        throw std::invalid_argument("affine signal needs one a and one b per path");
      }
      return InformationSignal::affine(net, to_eigen(signal.a), to_eigen(signal.b));
    case InformationSignal::Kind::Custom: {
      if (signal.knots.size() != p || signal.derivative_bounds.size() != p) {
        throw std::invalid_argument("piecewise-linear signal needs knots and a derivative bound per path");
      }
      std::vector<InformationSignal::ScalarMap> maps;
      for (const auto& k : signal.knots) maps.push_back(piecewise_linear(k));
      return InformationSignal::custom(net, std::move(maps), to_eigen(signal.derivative_bounds));
    }
  }
  throw std::invalid_argument("unknown signal kind");
}

SystemState Scenario::initial_state(const Network& net) const {
  switch (run.initial) {
    case InitialKind::Centroid:
      return centroid_state(net);
    case InitialKind::Random: {
      std::mt19937_64 rng(run.seed);
      return random_invariant_state(net, rng);
    }
    case InitialKind::Explicit:
      if (run.initial_x.size() != net.size() || run.initial_r.size() != net.size()) {
        throw std::invalid_argument("initial_x and initial_r need one entry per path");
      }
      return SystemState{to_eigen(run.initial_x), to_eigen(run.initial_r)};
  }
  throw std::invalid_argument("unknown initial state kind");
}

Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  std::string section;
  PathSpec* current_path = nullptr;

  const std::map<std::string, std::map<std::string, Handler>> handlers = [&] {
    std::map<std::string, std::map<std::string, Handler>> h;
    h["network"]["inflow"] = [&](const std::string& v, int l) { sc.inflow = parse_double(v, l); };

    auto& ph = h["path"];
    ph["kind"] = [&](const std::string& v, int l) {
      try {
        current_path->kind = diagram_kind_from_string(v);
      } catch (const std::exception&) {
        throw ConfigError("unknown diagram kind '" + v + "'", l);
      }
    };
    auto field = [&](double PathSpec::*m) {
      return [&, m](const std::string& v, int l) { current_path->*m = parse_double(v, l); };
    };
    ph["critical_density"] = field(&PathSpec::critical_density);
    ph["critical_flow"] = field(&PathSpec::critical_flow);
    ph["slope"] = field(&PathSpec::slope);
    ph["wave_speed"] = field(&PathSpec::wave_speed);
    ph["saturation_flow"] = field(&PathSpec::saturation_flow);
    ph["rate"] = field(&PathSpec::rate);
    ph["free_flow_time"] = [&](const std::string& v, int l) { current_path->bpr.free_flow_time = parse_double(v, l); };
    ph["theta"] = [&](const std::string& v, int l) { current_path->bpr.theta = parse_double(v, l); };
    ph["delta"] = [&](const std::string& v, int l) { current_path->bpr.delta = parse_double(v, l); };

    auto& sh = h["signal"];
    sh["kind"] = [&](const std::string& v, int l) {
      if (v == "affine") sc.signal.kind = InformationSignal::Kind::Affine;
      else if (v == "true_travel_time") sc.signal.kind = InformationSignal::Kind::TrueTravelTime;
      else if (v == "piecewise_linear") sc.signal.kind = InformationSignal::Kind::Custom;
      else throw ConfigError("unknown signal kind '" + v + "'", l);
    };
    sh["a"] = [&](const std::string& v, int l) { sc.signal.a = parse_vector(v, l); };
    sh["b"] = [&](const std::string& v, int l) { sc.signal.b = parse_vector(v, l); };
    sh["derivative_bounds"] = [&](const std::string& v, int l) {
      sc.signal.derivative_bounds = parse_vector(v, l);
    };

    auto& rh = h["run"];
    rh["eta"] = [&](const std::string& v, int l) { sc.run.eta = parse_double(v, l); };
    rh["t_end"] = [&](const std::string& v, int l) { sc.run.t_end = parse_double(v, l); };
    rh["dt"] = [&](const std::string& v, int l) { sc.run.dt = parse_double(v, l); };
    rh["initial"] = [&](const std::string& v, int l) {
      if (v == "centroid") {
        sc.run.initial = InitialKind::Centroid;
      } else if (v == "explicit") {
        sc.run.initial = InitialKind::Explicit;
      } else if (v.rfind("random:", 0) == 0) {
        sc.run.initial = InitialKind::Random;
        sc.run.seed = parse_unsigned(v.substr(7), l);
      } else {
        throw ConfigError("initial must be centroid, random:<seed> or explicit", l);
      }
    };
    rh["initial_x"] = [&](const std::string& v, int l) { sc.run.initial_x = parse_vector(v, l); };
    rh["initial_r"] = [&](const std::string& v, int l) { sc.run.initial_r = parse_vector(v, l); };

    auto& dh = h["design"];
    dh["gamma"] = [&](const std::string& v, int l) { sc.design.gamma = parse_double(v, l); };
    dh["starts"] = [&](const std::string& v, int l) { sc.design.starts = parse_positive_int(v, l); };
    dh["evaluations"] = [&](const std::string& v, int l) {
      sc.design.evaluations = parse_positive_int(v, l);
    };
    dh["seed"] = [&](const std::string& v, int l) { sc.design.seed = parse_unsigned(v, l); };
    return h;
  }();

  bool saw_network = false;
  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!handlers.count(section)) throw ConfigError("unknown section [" + section + "]", line_no);
      if (section == "path") {
        sc.paths.emplace_back();
        current_path = &sc.paths.back();
      }
      if (section == "network") saw_network = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
    if (section.empty()) throw ConfigError("key outside of any section", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);

    if (section == "signal" && key.rfind("knots_", 0) == 0) {
      const auto j = parse_unsigned(key.substr(6), line_no);
      if (j < 1 || j > 10000) throw ConfigError("knots index must start at 1", line_no);
      if (sc.signal.knots.size() < j) sc.signal.knots.resize(j);
      sc.signal.knots[j - 1] = parse_knots(value, line_no);
      continue;
    }
    const auto& keys = handlers.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
    it->second(value, line_no);
  }
  if (!saw_network) throw ConfigError("missing [network] section", 0);
  if (sc.paths.empty()) throw ConfigError("at least one [path] section is required", 0);
  for (std::size_t j = 0; j < sc.signal.knots.size(); ++j) {
    if (sc.signal.knots[j].empty()) {
      throw ConfigError("knots_" + std::to_string(j + 1) + " is missing", 0);
    }
  }
  validate(sc);
  return sc;
}

Scenario parse_scenario(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'", 0);
  return parse_scenario(in);
}

void validate(const Scenario& sc) {
  if (!(sc.run.eta >= 0.0)) throw ConfigError("eta must be nonnegative", 0);
  if (!(sc.run.dt > 0.0) || !(sc.run.t_end > 0.0)) throw ConfigError("dt and t_end must be positive", 0);
  if (!(sc.design.gamma >= 0.0)) throw ConfigError("gamma must be nonnegative", 0);
  try {
    const Network net = sc.network();
    (void)sc.build_signal(net);
    if (sc.run.initial == InitialKind::Explicit) {
      const SystemState s = sc.initial_state(net);
      if ((s.x.array() < 0.0).any()) throw ConfigError("initial_x must be nonnegative", 0);
      if ((s.r.array() < 0.0).any() || std::abs(s.r.sum() - 1.0) > 1e-9) {
        throw ConfigError("initial_r must lie on the simplex", 0);
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), 0);
  }
}

void write_scenario(std::ostream& out, const Scenario& sc) {
  const auto flags = out.flags();
  const auto precision = out.precision(17);
  out << "[network]\ninflow = " << sc.inflow << "\n";
  for (const auto& p : sc.paths) {
    out << "\n[path]\nkind = " << to_string(p.kind) << "\n";
    out << "critical_density = " << p.critical_density << "\n";
    switch (p.kind) {
      case DiagramKind::Greenshields:
        out << "critical_flow = " << p.critical_flow << "\n";
        break;
      case DiagramKind::Triangular:
        out << "critical_flow = " << p.critical_flow << "\nwave_speed = " << p.wave_speed << "\n";
        break;
      case DiagramKind::Exponential:
        out << "saturation_flow = " << p.saturation_flow << "\nrate = " << p.rate << "\n";
        break;
      case DiagramKind::CappedLinear:
        out << "slope = " << p.slope << "\n";
        break;
    }
    out << "free_flow_time = " << p.bpr.free_flow_time << "\ntheta = " << p.bpr.theta
        << "\ndelta = " << p.bpr.delta << "\n";
  }

  out << "\n[signal]\n";
  switch (sc.signal.kind) {
    case InformationSignal::Kind::TrueTravelTime:
      out << "kind = true_travel_time\n";
      break;
    case InformationSignal::Kind::Affine:
      out << "kind = affine\na = ";
      write_vector(out, sc.signal.a);
      out << "\nb = ";
      write_vector(out, sc.signal.b);
      out << "\n";
      break;
    case InformationSignal::Kind::Custom:
      out << "kind = piecewise_linear\n";
      for (std::size_t j = 0; j < sc.signal.knots.size(); ++j) {
        out << "knots_" << j + 1 << " =";
        for (const auto& [x, u] : sc.signal.knots[j]) out << ' ' << x << ':' << u;
        out << "\n";
      }
      out << "derivative_bounds = ";
      write_vector(out, sc.signal.derivative_bounds);
      out << "\n";
      break;
  }

  out << "\n[run]\neta = " << sc.run.eta << "\nt_end = " << sc.run.t_end << "\ndt = " << sc.run.dt
      << "\ninitial = ";
  switch (sc.run.initial) {
    case InitialKind::Centroid: out << "centroid\n"; break;
    case InitialKind::Random: out << "random:" << sc.run.seed << "\n"; break;
    case InitialKind::Explicit: out << "explicit\n"; break;
  }
  if (!sc.run.initial_x.empty()) {
    out << "initial_x = ";
    write_vector(out, sc.run.initial_x);
    out << "\n";
  }
  if (!sc.run.initial_r.empty()) {
    out << "initial_r = ";
    write_vector(out, sc.run.initial_r);
    out << "\n";
  }

  out << "\n[design]\ngamma = " << sc.design.gamma << "\nstarts = " << sc.design.starts
      << "\nevaluations = " << sc.design.evaluations << "\nseed = " << sc.design.seed << "\n";
  out.precision(precision);
  out.flags(flags);
}

std::vector<double> parse_grid(const std::string& text) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
  if (c2 == std::string::npos || text.find(':', c2 + 1) != std::string::npos) {
    throw ConfigError("grid must be min:max:count", 0);
  }
  const double lo = parse_double(trim(text.substr(0, c1)), 0);
  const double hi = parse_double(trim(text.substr(c1 + 1, c2 - c1 - 1)), 0);
  const auto count = parse_unsigned(trim(text.substr(c2 + 1)), 0);
  if (count < 2) throw ConfigError("grid count must be at least 2", 0);
  if (count > 100000) throw ConfigError("grid count is too large", 0);
  if (!(lo < hi)) throw ConfigError("grid needs min < max", 0);
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    values[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  values.back() = hi;
  return values;
}

}  // namespace infodesign
