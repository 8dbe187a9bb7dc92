#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "optomech/errors.hpp"

namespace optomech {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Largest real part among the eigenvalues of A.
template <class Derived>
double spectral_abscissa(const Eigen::MatrixBase<Derived>& A) {
  Eigen::EigenSolver<Matrix> es(Matrix(A), false);
  return es.eigenvalues().real().maxCoeff();
}

/// True when every eigenvalue of A has negative real part.
template <class Derived>
bool is_hurwitz(const Eigen::MatrixBase<Derived>& A) {
  return spectral_abscissa(A) < 0.0;
}

/// max|A V + V A^T + D| / max|D|; falls back to the absolute residual when D = 0.
template <class DA, class DV, class DD>
double lyapunov_residual(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DV>& V,
                         const Eigen::MatrixBase<DD>& D) {
  const Matrix R = A * V + V * A.transpose() + D;
  const double scale = D.cwiseAbs().maxCoeff();
  const double r = R.cwiseAbs().maxCoeff();
  return scale > 0.0 ? r / scale : r;
}

/// Solves A V + V A^T = -D for symmetric V by vectorising with (I (x) A + A (x) I).
template <class DA, class DD>
Matrix solve_lyapunov(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DD>& D,
                      double residual_tolerance = 1e-8) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || D.rows() != n || D.cols() != n)
    throw ConditioningError("solve_lyapunov: dimension mismatch");
  if (!is_hurwitz(A)) throw StabilityError("solve_lyapunov: drift matrix is not Hurwitz");

  Matrix K = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K.block(i * n, i * n, n, n) += A;
    for (Eigen::Index j = 0; j < n; ++j) K.block(i * n, j * n, n, n).diagonal().array() += A(i, j);
  }
  Vector rhs(n * n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) rhs(c * n + r) = -D(r, c);

  Eigen::PartialPivLU<Matrix> lu(K);
  const Vector x = lu.solve(rhs);
  Matrix V(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r) V(r, c) = x(c * n + r);
  if (!V.allFinite()) throw ConditioningError("solve_lyapunov: non-finite solution");
  V = 0.5 * (V + V.transpose()).eval();

  const double residual = lyapunov_residual(A, V, D);
  if (!(residual < residual_tolerance))
    throw ConditioningError("solve_lyapunov: residual " + std::to_string(residual) +
                            " exceeds tolerance");
  return V;
}

}  // namespace optomech
