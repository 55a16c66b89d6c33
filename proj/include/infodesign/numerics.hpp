#pragma once

#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace infodesign {

struct QuadratureRule {
  Eigen::VectorXd nodes;    // on [-1, 1]
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule (Golub-Welsch).
QuadratureRule gauss_legendre(int n);

/// Integral of f over [lo, hi] with an n-point Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double lo, double hi, int n = 32);

struct NelderMeadOptions {
  int max_evaluations = 5000;
  double initial_step = 0.1;
  double f_tolerance = 1e-14;
  double x_tolerance = 1e-12;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double initial_value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex-reflection minimizer. The returned value never
/// exceeds the value at the starting point.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const NelderMeadOptions& options = {});

/// Euclidean projection of v onto {y : lower <= y <= upper, sum(y) = total}.
/// Requires sum(lower) <= total <= sum(upper).
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, const Eigen::VectorXd& lower,
                                       const Eigen::VectorXd& upper, double total);

/// Runs task(i) for i in [0, count) on up to `workers` threads (0 = hardware concurrency).
/// Tasks must not share mutable state; exceptions are rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task,
                  unsigned workers = 0);

}  // namespace infodesign
