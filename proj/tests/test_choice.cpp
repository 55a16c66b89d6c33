#include <doctest.h>

#include <cmath>
#include <random>

#include "infodesign/choice.hpp"
#include "infodesign/errors.hpp"

using namespace infodesign;

TEST_CASE("softmax of equal inputs is uniform") {
  const Eigen::VectorXd s = softmax(Eigen::VectorXd::Constant(5, 3.7), 20.0);
  for (int j = 0; j < 5; ++j) CHECK(s[j] == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("softmax two-path value") {
  for (double eta : {0.5, 1.0, 7.0}) {
    const Eigen::Vector2d z(0.0, std::log(3.0) / eta);
    const Eigen::Vector2d s = softmax(z, eta);
    CHECK(s[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(s[1] == doctest::Approx(0.25).epsilon(1e-14));
  }
}

TEST_CASE("softmax with zero responsiveness ignores the input") {
  const Eigen::Vector3d s = softmax(Eigen::Vector3d(1.0, -40.0, 300.0), 0.0);
  for (int j = 0; j < 3; ++j) CHECK(s[j] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("softmax stays finite for large inputs") {
  const Eigen::Vector3d s = softmax(Eigen::Vector3d(1000.0, 1001.0, 5000.0), 50.0);
  CHECK(s.allFinite());
  CHECK(s.sum() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s[0] > 0.99);
}

TEST_CASE("softmax rejects bad input") {
  CHECK_THROWS_AS(softmax(Eigen::Vector2d(0.0, NAN), 1.0), DomainError);
  CHECK_THROWS_AS(softmax(Eigen::Vector2d(0.0, 1.0), -1.0), DomainError);
}

TEST_CASE("softmax works on fixed-size and float vectors") {
  const Eigen::Vector2f s = softmax(Eigen::Vector2f(0.0f, 0.0f), 1.0f);
  CHECK(s[0] == doctest::Approx(0.5));
  const Eigen::Matrix<double, 4, 1> z(1.0, 2.0, 3.0, 4.0);
  CHECK(softmax(z, 1.0).sum() == doctest::Approx(1.0));
}

TEST_CASE("softmax jacobian closed form") {
  const Eigen::Matrix2d j = softmax_jacobian(Eigen::Vector2d(0.3, 0.3), 1.0);
  CHECK(j(0, 0) == doctest::Approx(-0.25));
  CHECK(j(0, 1) == doctest::Approx(0.25));
  CHECK(j(1, 0) == doctest::Approx(0.25));
  CHECK(j(1, 1) == doctest::Approx(-0.25));
  CHECK(softmax_jacobian(Eigen::Vector3d(1.0, 2.0, 3.0), 0.0).isZero(0.0));
}

TEST_CASE("softmax jacobian matches central differences") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd z(6);
    for (int j = 0; j < 6; ++j) z[j] = normal(rng);
    const double eta = 0.5 + trial % 5;
    const Eigen::MatrixXd jac = softmax_jacobian(z, eta);
    const double h = 1e-5;
    for (int k = 0; k < 6; ++k) {
      Eigen::VectorXd zp = z, zm = z;
      zp[k] += h;
      zm[k] -= h;
      const Eigen::VectorXd col = (softmax(zp, eta) - softmax(zm, eta)) / (2 * h);
      CHECK((col - jac.col(k)).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("lipschitz bound") {
  CHECK(lipschitz_bound(20.0) == 10.0);
  CHECK(lipschitz_bound(1.0) == 0.5);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd z(4), w(4);
    for (int j = 0; j < 4; ++j) {
      z[j] = normal(rng);
      w[j] = normal(rng);
    }
    worst = std::max(worst, (softmax(z, 1.0) - softmax(w, 1.0)).norm() / (z - w).norm());
  }
  CHECK(worst <= 0.5);
}

TEST_CASE("jacobian norm reaches the bound at the uniform two-path point") {
  const double eta = 2.0;
  CHECK(softmax_jacobian_norm(Eigen::Vector2d(0.0, 0.0), eta) == doctest::Approx(eta / 2).epsilon(1e-14));
  const double eps = 1e-7;
  const Eigen::Vector2d z(0.0, 0.0), w(eps, -eps);
  const double ratio = (softmax(z, eta) - softmax(w, eta)).norm() / (z - w).norm();
  CHECK(ratio == doctest::Approx(eta / 2).epsilon(1e-6));
}
