#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "infodesign/errors.hpp"
#include "infodesign/infosignal.hpp"

using namespace infodesign;

namespace {

Network single_path(double mu, double xc, double inflow, BprParams bpr = {}) {
  return Network({Path(FundamentalDiagram::capped_linear(mu, xc), bpr)}, inflow);
}

// Identical capped-linear paths.
Network identical_paths(int p, double mu, double xc, double inflow) {
  std::vector<Path> paths(p, Path(FundamentalDiagram::capped_linear(mu, xc), {}));
  return Network(std::move(paths), inflow);
}

}  // namespace

TEST_CASE("affine signal evaluation") {
  const Network net = fixtures::five_path_network();
  const auto u = InformationSignal::affine(net, fixtures::published_slopes(), fixtures::published_offsets());
  const Eigen::VectorXd at_zero = evaluate(u, net, Eigen::VectorXd::Zero(5));
  CHECK((at_zero - fixtures::published_offsets()).norm() == 0.0);

  const auto zero = InformationSignal::affine(net, Eigen::VectorXd::Zero(5), Eigen::VectorXd::Zero(5));
  CHECK(evaluate(zero, net, net.critical_densities()).isZero(0.0));
}

TEST_CASE("true travel time signal evaluation") {
  const Network net = fixtures::five_path_network();
  const auto tt = InformationSignal::true_travel_time(net);
  const Eigen::VectorXd u0 = evaluate(tt, net, Eigen::VectorXd::Zero(5));
  CHECK(u0[0] == 8.0);
  CHECK(u0[1] == 6.0);
  CHECK(u0[2] == 5.0);
  CHECK(u0[3] == 5.0);
  CHECK(u0[4] == 2.0);
}

TEST_CASE("affine signals must be nonnegative on the free-flow region") {
  const Network net = single_path(2.0, 1.0, 1.0);
  CHECK_THROWS_AS(InformationSignal::affine(net, Eigen::VectorXd::Constant(1, 0.0),
                                            Eigen::VectorXd::Constant(1, -0.1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(InformationSignal::affine(net, Eigen::VectorXd::Constant(1, -2.0),
                                            Eigen::VectorXd::Constant(1, 1.0)),
                  std::invalid_argument);
  CHECK_NOTHROW(InformationSignal::affine(net, Eigen::VectorXd::Constant(1, -1.0),
                                          Eigen::VectorXd::Constant(1, 1.0)));
  CHECK_THROWS_AS(InformationSignal::affine(net, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("custom signals are checked against their declared slope") {
  const Network net = single_path(2.0, 1.0, 1.0);
  const auto map = piecewise_linear({{0.0, 1.0}, {0.5, 2.0}, {1.0, 2.0}});
  CHECK(map(0.25) == doctest::Approx(1.5));
  CHECK(map(2.0) == doctest::Approx(2.0));
  CHECK_NOTHROW(InformationSignal::custom(net, {map}, Eigen::VectorXd::Constant(1, 2.0)));
  CHECK_THROWS_AS(InformationSignal::custom(net, {map}, Eigen::VectorXd::Constant(1, 1.0)),
                  std::invalid_argument);
  const auto negative = piecewise_linear({{0.0, -1.0}, {1.0, 1.0}});
  CHECK_THROWS_AS(InformationSignal::custom(net, {negative}, Eigen::VectorXd::Constant(1, 5.0)),
                  std::invalid_argument);
}

TEST_CASE("custom signal derivative") {
  const Network net = single_path(2.0, 1.0, 1.0);
  const auto u = InformationSignal::custom(net, {piecewise_linear({{0.0, 1.0}, {1.0, 4.0}})},
                                           Eigen::VectorXd::Constant(1, 3.0));
  CHECK(u.derivative(net, 0, 0.3) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(bounds(u, net).max_derivative == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("signal bounds") {
  const Network net = fixtures::five_path_network();
  const auto u = InformationSignal::affine(net, fixtures::published_slopes(), fixtures::published_offsets());
  const SignalBounds b = bounds(u, net);
  CHECK(b.lower[1] == doctest::Approx(6.1015).epsilon(1e-14));
  CHECK(b.upper[1] == doctest::Approx(6.13).epsilon(1e-14));
  CHECK(b.derivative[1] == doctest::Approx(0.19).epsilon(1e-14));
  CHECK(b.max_derivative == doctest::Approx(0.2));

  const auto constant = InformationSignal::affine(net, Eigen::VectorXd::Zero(5), Eigen::VectorXd::Constant(5, 5.0));
  const SignalBounds c = bounds(constant, net);
  CHECK(c.lower.isApprox(Eigen::VectorXd::Constant(5, 5.0)));
  CHECK(c.upper.isApprox(Eigen::VectorXd::Constant(5, 5.0)));
  CHECK(c.max_derivative == 0.0);

  const SignalBounds t = bounds(InformationSignal::true_travel_time(net), net);
  CHECK(t.lower[4] == doctest::Approx(2.0));
  CHECK(t.upper[4] == doctest::Approx(5.0));
  CHECK(t.derivative[4] == doctest::Approx(30.0));
  CHECK(t.max_derivative == doctest::Approx(160.0));
}

TEST_CASE("existence check on the designed signal") {
  const Network net = fixtures::five_path_network();
  const auto u = InformationSignal::affine(net, fixtures::published_slopes(), fixtures::published_offsets());
  const double eta = 20.0;
  const ExistenceCheck ex = check_existence(u, net, eta);
  CHECK(ex.ok);

  // direct evaluation of f_bar_j * sum_i exp(-eta (u_upper_i - u_lower_j))
  const SignalBounds b = bounds(u, net);
  const Eigen::VectorXd fbar = net.critical_flows();
  for (int j = 0; j < 5; ++j) {
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) sum += std::exp(-eta * (b.upper[i] - b.lower[j]));
    CHECK(ex.value[j] == doctest::Approx(fbar[j] * sum).epsilon(1e-12));
    CHECK(ex.value[j] >= 1.0);
  }
  CHECK(ex.value[4] == doctest::Approx(1.11).epsilon(0.01));
}

TEST_CASE("existence check single-path reduction") {
  for (double spread : {0.0, 0.01, 0.05, 0.2}) {
    const Network net = single_path(2.0, 0.5, 0.9);
    const double eta = 3.0;
    const auto u = InformationSignal::affine(net, Eigen::VectorXd::Constant(1, spread / 0.5),
                                             Eigen::VectorXd::Constant(1, 1.0));
    const bool expected = 0.9 <= 1.0 * std::exp(-eta * spread);
    CHECK(check_existence(u, net, eta).ok == expected);
  }
}

TEST_CASE("existence check for a constant signal on identical paths") {
  for (double inflow : {0.5, 1.4, 1.5, 1.6, 3.0}) {
    const Network net = identical_paths(3, 1.0, 0.5, inflow);
    const auto u = InformationSignal::affine(net, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 2.0));
    CHECK(check_existence(u, net, 4.0).ok == (inflow <= 3 * 0.5));
    // without slope the sufficient and necessary conditions coincide
    CHECK(check_necessity(u, net, 4.0).ok == check_existence(u, net, 4.0).ok);
    CHECK((check_necessity(u, net, 4.0).log_margin - check_existence(u, net, 4.0).log_margin).norm() <= 1e-14);
  }
}

TEST_CASE("sufficient condition implies the necessary one") {
  const Network net = fixtures::five_path_network();
  const auto u = InformationSignal::affine(net, fixtures::published_slopes(), fixtures::published_offsets());
  for (double eta : {0.0, 1.0, 5.0, 20.0, 60.0}) {
    if (check_existence(u, net, eta).ok) CHECK(check_necessity(u, net, eta).ok);
    CHECK((check_necessity(u, net, eta).log_margin.array() >=
           check_existence(u, net, eta).log_margin.array()).all());
  }
  CHECK(check_necessity(u, net, 20.0).ok);
}

TEST_CASE("uniqueness and stability check") {
  const Network net = fixtures::five_path_network();
  const auto u = InformationSignal::affine(net, fixtures::published_slopes(), fixtures::published_offsets());
  const UniquenessCheck at20 = check_uniqueness_stability(u, net, 20.0);
  CHECK(at20.threshold == doctest::Approx(0.2));
  CHECK(at20.max_derivative == doctest::Approx(0.2));
  CHECK(at20.status == CheckStatus::Boundary);

  const auto constant = InformationSignal::affine(net, Eigen::VectorXd::Zero(5), Eigen::VectorXd::Constant(5, 6.0));
  for (double eta : {0.0, 1.0, 100.0, 1e6}) {
    CHECK(check_uniqueness_stability(constant, net, eta).status == CheckStatus::Pass);
  }

  Eigen::VectorXd a = Eigen::VectorXd::Zero(5);
  a[0] = 0.3;
  const auto steeper = InformationSignal::affine(net, a, Eigen::VectorXd::Constant(5, 6.0));
  const UniquenessCheck at10 = check_uniqueness_stability(steeper, net, 10.0);
  CHECK(at10.threshold == doctest::Approx(0.4));
  CHECK(at10.status == CheckStatus::Pass);
  CHECK(check_uniqueness_stability(steeper, net, 20.0).status == CheckStatus::Fail);
  CHECK(std::isinf(check_uniqueness_stability(steeper, net, 0.0).threshold));
}

TEST_CASE("class verdicts") {
  const Network net = fixtures::five_path_network();
  const auto designed = InformationSignal::affine(net, fixtures::published_slopes(), fixtures::published_offsets());
  const ConditionReport d = check_class_U(designed, net, 20.0);
  CHECK(d.existence_ok());
  CHECK(d.uniqueness.status == CheckStatus::Boundary);
  CHECK(d.verdict == Verdict::Boundary);

  const auto tt = InformationSignal::true_travel_time(net);
  const ConditionReport t = check_class_U(tt, net, 20.0);
  CHECK(t.uniqueness.max_derivative == doctest::Approx(160.0));
  CHECK(t.verdict == Verdict::Out);
  CHECK_FALSE(t.in_class_U());

  const Network light = identical_paths(3, 2.0, 0.5, 0.1);
  const auto constant = InformationSignal::affine(light, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Constant(3, 1.0));
  CHECK(check_class_U(constant, light, 5.0).in_class_U());
  CHECK(to_string(Verdict::InClass) == "in-U");
}
