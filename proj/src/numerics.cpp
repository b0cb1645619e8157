#include "stbg/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stbg/errors.hpp"

namespace stbg {

bool is_finite(const Matrix& m) { return m.allFinite(); }

Vector canonicalize_signs(Matrix& columns) {
  Vector signs = Vector::Ones(columns.cols());
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      const double mag = std::abs(columns(i, j));
      // Ties resolve to the first index so the convention is deterministic.
      if (mag > best * (1.0 + 1e-12)) {
        best = mag;
        arg = i;
      }
    }
    if (columns.rows() > 0 && columns(arg, j) < 0.0) {
      columns.col(j) *= -1.0;
      signs(j) = -1.0;
    }
  }
  return signs;
}

SvdResult svd(const Matrix& w) {
  if (w.rows() < 1 || w.cols() < 1) {
    throw InvalidInput("svd: matrix must have at least one row and column");
  }
  if (!is_finite(w)) {
    throw InvalidInput("svd: matrix contains non-finite entries");
  }

  // The column-pivoting QR preconditioner reduces a tall (or wide) matrix to
  // its small square factor before the Jacobi sweeps, so cost scales with the
  // smaller dimension.
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> solver(
      w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("svd: Jacobi iteration did not converge");
  }

  SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  if (!is_finite(out.u) || !is_finite(out.q) || !out.sigma.allFinite()) {
    throw NumericalFailure("svd: produced non-finite factors");
  }

  const double sigma_max = out.sigma.size() > 0 ? out.sigma(0) : 0.0;
  for (Eigen::Index k = 0; k < out.sigma.size(); ++k) {
    if (out.sigma(k) <= kRankTolerance * sigma_max) out.sigma(k) = 0.0;
  }

  const Vector signs = canonicalize_signs(out.u);
  for (Eigen::Index j = 0; j < out.q.cols(); ++j) out.q.col(j) *= signs(j);
  return out;
}

SymmetricEigen eig_sym(const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() < 1) {
    throw InvalidInput("eig_sym: matrix must be square and non-empty");
  }
  if (!is_finite(s)) {
    throw InvalidInput("eig_sym: matrix contains non-finite entries");
  }
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InvalidInput("eig_sym: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("eig_sym: eigensolver did not converge");
  }

  // Eigen returns ascending order.
  const Eigen::Index n = s.rows();
  SymmetricEigen out{solver.eigenvalues().reverse(), Matrix(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    out.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  }
  canonicalize_signs(out.vectors);
  return out;
}

Matrix pinv(const Matrix& a, std::optional<double> tol) {
  if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  if (tol && *tol < 0.0) throw InvalidInput("pinv: tolerance must be >= 0");

  const SvdResult f = svd(a);
  const double sigma_max = f.sigma.size() > 0 ? f.sigma(0) : 0.0;
  const double cutoff = tol ? *tol : 1e-10 * sigma_max;

  Vector inv = Vector::Zero(f.sigma.size());
  for (Eigen::Index k = 0; k < f.sigma.size(); ++k) {
    if (f.sigma(k) > cutoff && f.sigma(k) > 0.0) inv(k) = 1.0 / f.sigma(k);
  }
  return f.q * inv.asDiagonal() * f.u.transpose();
}

Matrix lstsq(const Matrix& coeffs, const Matrix& rhs) {
  if (coeffs.rows() != rhs.rows()) {
    throw InvalidInput("lstsq: coefficient rows (" + std::to_string(coeffs.rows()) +
                       ") differ from right-hand side rows (" +
                       std::to_string(rhs.rows()) + ")");
  }
  return pinv(coeffs) * rhs;
}

}  // namespace stbg
