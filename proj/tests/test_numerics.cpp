#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>

#include "infodesign/numerics.hpp"

using namespace infodesign;

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  for (int n : {1, 2, 5, 16, 32}) {
    const QuadratureRule rule = gauss_legendre(n);
    CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
      const double approx = integrate([k](double y) { return std::pow(y, k); }, -1.0, 1.0, n);
      CHECK(approx == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("gauss-legendre on a smooth integrand") {
  CHECK(integrate([](double y) { return std::exp(y); }, 0.0, 1.0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-15));
  CHECK(integrate([](double y) { return std::sin(y); }, 0.0, M_PI) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
}

TEST_CASE("nelder-mead minimizes the rosenbrock function") {
  auto rosen = [](const Eigen::VectorXd& v) {
    return 100.0 * std::pow(v[1] - v[0] * v[0], 2) + std::pow(1.0 - v[0], 2);
  };
  NelderMeadOptions opt;
  opt.max_evaluations = 20000;
  const auto res = nelder_mead(rosen, Eigen::Vector2d(-1.2, 1.0), opt);
  CHECK(res.value < 1e-10);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(res.value <= res.initial_value);
}

TEST_CASE("nelder-mead respects its evaluation budget") {
  int calls = 0;
  NelderMeadOptions opt;
  opt.max_evaluations = 50;
  const auto res = nelder_mead([&](const Eigen::VectorXd& v) { ++calls; return v.squaredNorm(); },
                               Eigen::VectorXd::Constant(6, 3.0), opt);
  CHECK(calls <= 50 + 7);
  CHECK(res.value <= res.initial_value);
}

TEST_CASE("capped simplex projection satisfies the optimality conditions") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 2 + trial % 6;
    Eigen::VectorXd lower(p), upper(p), v(p);
    for (int j = 0; j < p; ++j) {
      lower[j] = 0.05 * unit(rng);
      upper[j] = lower[j] + 0.1 + unit(rng);
      v[j] = normal(rng);
    }
    const double total = lower.sum() + unit(rng) * (upper.sum() - lower.sum());
    const Eigen::VectorXd y = project_capped_simplex(v, lower, upper, total);
    CHECK(y.sum() == doctest::Approx(total).epsilon(1e-12));
    CHECK(((y - lower).array() >= -1e-15).all());
    CHECK(((upper - y).array() >= -1e-15).all());

    // free coordinates share one shift; clamped ones sit on the side the shift pushes them
    double shift = NAN;
    for (int j = 0; j < p; ++j) {
      if (y[j] > lower[j] + 1e-12 && y[j] < upper[j] - 1e-12) shift = v[j] - y[j];
    }
    if (!std::isnan(shift)) {
      for (int j = 0; j < p; ++j) {
        const double z = v[j] - shift;
        if (y[j] > lower[j] + 1e-12 && y[j] < upper[j] - 1e-12) CHECK(z == doctest::Approx(y[j]));
        else if (y[j] <= lower[j] + 1e-12) CHECK(z <= lower[j] + 1e-9);
        else CHECK(z >= upper[j] - 1e-9);
      }
    }

    // no random feasible point is closer
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd w(p);
      for (int j = 0; j < p; ++j) w[j] = lower[j] + unit(rng) * (upper[j] - lower[j]);
      const Eigen::VectorXd candidate = project_capped_simplex(w, lower, upper, total);
      CHECK((v - y).norm() <= (v - candidate).norm() + 1e-12);
    }
  }
}

TEST_CASE("capped simplex projection rejects empty sets") {
  CHECK_THROWS_AS(project_capped_simplex(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0),
                                         Eigen::Vector2d(0.4, 0.4), 1.0),
                  std::invalid_argument);
}

TEST_CASE("parallel_for runs every index once and propagates exceptions") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, [&](std::size_t i) { hits[i]++; }, 4);
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 3) throw std::runtime_error("x"); }, 3),
                  std::runtime_error);
}
