#pragma once

#include <Eigen/Dense>

namespace dce {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntMatrix = Eigen::MatrixXi;

// a ⊗ I_n
inline Matrix kron_identity(const Matrix& a, int n) {
  Matrix out = Matrix::Zero(a.rows() * n, a.cols() * n);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0)
        out.block(i * n, j * n, n, n) = a(i, j) * Matrix::Identity(n, n);
  return out;
}

// 2-norm (largest singular value)
inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

inline Matrix symmetric_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// minimum eigenvalue of a symmetric matrix
inline double min_eigenvalue_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace dce
