#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "infodesign/commands.hpp"
#include "infodesign/errors.hpp"

using namespace infodesign;
namespace fs = std::filesystem;

namespace {

const std::string kDir = INFODESIGN_SCENARIO_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "infodesign");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("infodesign_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"launch"}).code == 1);
  CHECK(cli({"check"}).code == 1);
  CHECK(cli({"sweep", "--scenario", kDir + "/five_path_travel_time.ini", "--param", "theta",
             "--grid", "1:2:3"}).code == 1);
  CHECK(cli({"sweep", "--scenario", kDir + "/five_path_travel_time.ini", "--param", "eta",
             "--grid", "5:4:3"}).code == 1);
  CHECK(cli({"check", "--scenario", kDir + "/missing.ini"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("config errors exit with 1 and name the line") {
  const fs::path dir = scratch("bad_config");
  std::ofstream(dir / "bad.ini") << "[network]\ninflow = 1\n[path]\nkind = capped_linear\nslope = fast\n";
  const Run r = cli({"check", "--scenario", (dir / "bad.ini").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 5") != std::string::npos);
}

TEST_CASE("numerical failures exit with 2") {
  const fs::path dir = scratch("overload");
  std::ofstream(dir / "overload.ini")
      << "[network]\ninflow = 5\n[path]\nkind = capped_linear\nslope = 2\ncritical_density = 0.5\n"
      << "[path]\nkind = capped_linear\nslope = 2\ncritical_density = 0.5\n"
      << "[run]\neta = 5\n[design]\nstarts = 2\nevaluations = 200\n";
  CHECK(cli({"design", "--scenario", (dir / "overload.ini").string()}).code == 2);
}

TEST_CASE("check command") {
  const Run designed = cli({"check", "--scenario", kDir + "/five_path_designed.ini"});
  CHECK(designed.code == 0);
  CHECK(designed.out.find("existence: pass") != std::string::npos);
  CHECK(designed.out.find("verdict: boundary") != std::string::npos);

  const Run tt = cli({"check", "--scenario", kDir + "/five_path_travel_time.ini"});
  CHECK(tt.code == 0);
  CHECK(tt.out.find("verdict: out") != std::string::npos);

  const Scenario sc = load_scenario(kDir + "/five_path_designed.ini");
  Scenario constant = sc;
  constant.inflow = 0.1;
  constant.signal.a.assign(5, 0.0);
  constant.signal.b = {8.0, 6.0, 5.0, 5.0, 2.0};
  std::ostringstream sink;
  CHECK(cmd_check(constant, sink).in_class_U());
}

TEST_CASE("equilibrium command writes csv") {
  const fs::path dir = scratch("equilibrium");
  const Run r = cli({"equilibrium", "--scenario", kDir + "/five_path_designed.ini", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "equilibrium.csv").rfind("path,x_eq,r_eq,regime,f,tau", 0) == 0);
}

TEST_CASE("simulate command") {
  const fs::path dir = scratch("simulate");
  const Run r = cli({"simulate", "--scenario", kDir + "/five_path_designed.ini", "--out", dir.string(),
                     "--seed", "9"});
  CHECK(r.code == 0);
  CHECK(r.out.find("invariance_violations = 0") != std::string::npos);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "plot_trajectory.py"));

  const Scenario sc = load_scenario(kDir + "/five_path_designed.ini");
  std::ostringstream sink;
  const SimulationSummary s = cmd_simulate(sc, sink);
  REQUIRE(s.distance.has_value());
  CHECK(*s.distance <= 1e-3);
}

TEST_CASE("simulation from the equilibrium is flat") {
  Scenario sc = load_scenario(kDir + "/five_path_designed.ini");
  const Network net = sc.network();
  const auto eq = solve_equilibrium(net, sc.build_signal(net), sc.run.eta);
  sc.run.initial = InitialKind::Explicit;
  sc.run.initial_x.assign(eq.x.data(), eq.x.data() + 5);
  sc.run.initial_r.assign(eq.r.data(), eq.r.data() + 5);
  sc.run.initial_r.back() = 1.0 - (eq.r.sum() - eq.r[4]);
  std::ostringstream sink;
  const SimulationSummary s = cmd_simulate(sc, sink);
  for (const auto& st : s.trajectory.states) CHECK((st.x - eq.x).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("sweep csv is reparseable and sized grid by paths") {
  const fs::path dir = scratch("sweep");
  const Run r = cli({"sweep", "--scenario", kDir + "/five_path_designed.ini", "--param", "eta",
                     "--grid", "5:30:6", "--out", dir.string()});
  CHECK(r.code == 0);
  std::ifstream in(dir / "sweep.csv");
  const auto rows = read_sweep_csv(in);
  CHECK(rows.size() == 6 * 5);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].param_value >= rows[k - 1].param_value);
  for (const auto& row : rows) {
    CHECK(row.status == "ok");
    CHECK(row.regime == "free_flow");
  }
  CHECK(fs::exists(dir / "plot_sweep.py"));
  CHECK_FALSE(fs::exists(dir / "onset.txt"));
}

TEST_CASE("travel-time eta sweep reports the onset") {
  const fs::path dir = scratch("onset");
  const Run r = cli({"sweep", "--scenario", kDir + "/five_path_travel_time.ini", "--param", "eta",
                     "--grid", "5:12:8", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(slurp(dir / "onset.txt").find("path = 5") != std::string::npos);
  std::ifstream in(dir / "sweep.csv");
  const auto rows = read_sweep_csv(in);
  CHECK(rows.size() == 8 * 5);
  CHECK(rows.front().regime == "free_flow");
  CHECK(rows.back().regime == "congested");
}

TEST_CASE("gamma sweep rows") {
  Scenario sc = load_scenario(kDir + "/five_path_designed.ini");
  sc.design.starts = 4;
  SweepSpec spec;
  spec.param = SweepParam::Gamma;
  spec.task = SweepTask::Design;
  spec.values = {0.0, 0.1, 1.0};
  std::ostringstream out;
  const SweepOutcome o = cmd_sweep(sc, spec, out);
  CHECK(o.rows.size() == 15);
  std::istringstream in(out.str());
  CHECK(read_sweep_csv(in).size() == 15);
  CHECK_THROWS_AS(cmd_sweep(sc, {SweepParam::Gamma, {0.0, 1.0}, SweepTask::Equilibrium}, out), ConfigError);
}

TEST_CASE("failed sweep points are recorded and the sweep continues") {
  Scenario sc = load_scenario(kDir + "/five_path_designed.ini");
  sc.design.starts = 2;
  sc.design.evaluations = 300;
  SweepSpec spec;
  spec.param = SweepParam::Eta;
  spec.task = SweepTask::Design;
  spec.values = {-1.0, 20.0};
  std::ostringstream out;
  const SweepOutcome o = cmd_sweep(sc, spec, out);
  REQUIRE(o.rows.size() == 10);
  CHECK(o.rows.front().status != "ok");
  CHECK(o.rows.back().status == "ok");
}

TEST_CASE("outputs are bit-identical for identical seeds") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    CHECK(cli({"simulate", "--scenario", kDir + "/five_path_designed.ini", "--seed", "3", "--out",
               dir.string()}).code == 0);
    CHECK(cli({"design", "--scenario", kDir + "/five_path_designed.ini", "--seed", "3", "--out",
               dir.string()}).code == 0);
  }
  CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
  CHECK(slurp(a / "design.txt") == slurp(b / "design.txt"));
  CHECK(slurp(a / "design.csv") == slurp(b / "design.csv"));
}

TEST_CASE("design command re-verifies its result") {
  const fs::path dir = scratch("design");
  const Run r = cli({"design", "--scenario", kDir + "/five_path_designed.ini", "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("existence: pass") != std::string::npos);
  const Scenario designed = load_scenario((dir / "designed_scenario.ini").string());
  CHECK(designed.signal.kind == InformationSignal::Kind::Affine);
}
