#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "infodesign/errors.hpp"

namespace infodesign {

/// Logit route choice: sigma(z) = exp(-eta z) / 1^T exp(-eta z).
///
/// Evaluated after subtracting min(z), which leaves sigma unchanged (shift
/// invariance) and keeps every exponent <= 0.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar eta) {
  using Scalar = typename Derived::Scalar;
  if (!z.allFinite() || !std::isfinite(eta)) throw DomainError("softmax input must be finite");
  if (eta < Scalar(0)) throw DomainError("responsiveness eta must be nonnegative");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = (-eta * (z.array() - z.minCoeff())).exp().matrix();
  return w / w.sum();
}

/// J(z) = -eta (diag(sigma) - sigma sigma^T). Symmetric with zero row sums.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> softmax_jacobian(
    const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar eta) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> s = softmax(z, eta);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> jac = s * s.transpose();
  jac.diagonal() -= s;
  return eta * jac;
}

/// Global Lipschitz constant of sigma in the Euclidean norm.
template <typename Scalar>
Scalar lipschitz_bound(Scalar eta) {
  if (eta < Scalar(0)) throw DomainError("responsiveness eta must be nonnegative");
  return eta / Scalar(2);
}

/// Largest absolute eigenvalue of the (symmetric) softmax Jacobian at z.
template <typename Derived>
typename Derived::Scalar softmax_jacobian_norm(const Eigen::MatrixBase<Derived>& z,
                                               typename Derived::Scalar eta) {
  using Scalar = typename Derived::Scalar;
  const auto jac = softmax_jacobian(z, eta);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> eig(
      jac, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace infodesign
