#include "infodesign/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

namespace infodesign {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature order must be positive");
  // Jacobi matrix of the Legendre three-term recurrence
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadratureRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights = 2.0 * eig.eigenvectors().row(0).transpose().array().square();
  return rule;
}

double integrate(const std::function<double(double)>& f, double lo, double hi, int n) {
  static const QuadratureRule rule32 = gauss_legendre(32);
  const QuadratureRule rule = n == 32 ? rule32 : gauss_legendre(n);
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < rule.nodes.size(); ++k) {
    sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  }
  return half * sum;
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& start, const NelderMeadOptions& options) {
  const Eigen::Index n = start.size();
  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = start[i] != 0.0 ? options.initial_step * std::max(1.0, std::abs(start[i]))
                                        : options.initial_step;
    simplex[i + 1][i] += step;
  }

  NelderMeadResult result;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    const double v = objective(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  for (Eigen::Index i = 0; i <= n; ++i) values[i] = eval(simplex[i]);
  result.initial_value = values[0];

  std::vector<std::size_t> order(n + 1);
  while (evals < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    double spread = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i) {
      spread = std::max(spread, (simplex[i] - simplex[best]).cwiseAbs().maxCoeff());
    }
    if (std::abs(values[worst] - values[best]) <= options.f_tolerance &&
        spread <= options.x_tolerance) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (static_cast<std::size_t>(i) != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    // shrink toward the best vertex
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (static_cast<std::size_t>(i) == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }

  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  result.x = simplex[best];
  result.value = values[best];
  result.evaluations = evals;
  return result;
}

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, const Eigen::VectorXd& lower,
                                       const Eigen::VectorXd& upper, double total) {
  if (lower.sum() > total * (1.0 + 1e-12) || upper.sum() < total * (1.0 - 1e-12)) {
    throw std::invalid_argument("capped simplex is empty");
  }
  // y(s) = clamp(v - s, lower, upper) is nonincreasing in s; bisect sum(y(s)) = total
  auto clamped_sum = [&](double s) { return (v.array() - s).max(lower.array()).min(upper.array()).sum(); };
  double lo = (v - upper).minCoeff() - 1.0;
  double hi = (v - lower).maxCoeff() + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (clamped_sum(mid) > total) lo = mid; else hi = mid;
  }
  Eigen::VectorXd y = (v.array() - 0.5 * (lo + hi)).max(lower.array()).min(upper.array()).matrix();
  // distribute the residual bisection error over the free coordinates
  const double gap = total - y.sum();
  std::vector<Eigen::Index> free;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if ((gap > 0 && y[j] < upper[j]) || (gap < 0 && y[j] > lower[j])) free.push_back(j);
  }
  for (auto j : free) {
    y[j] = std::clamp(y[j] + gap / static_cast<double>(free.size()), lower[j], upper[j]);
  }
  return y;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task,
                  unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace infodesign
