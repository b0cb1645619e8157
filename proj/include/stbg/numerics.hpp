#pragma once

#include <optional>

#include <Eigen/Dense>

namespace stbg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values below this fraction of the largest one are exact zeros.
inline constexpr double kRankTolerance = 1e-12;

struct SvdResult {
  Matrix u;      // rows x k, orthonormal columns
  Vector sigma;  // k values, non-increasing
  Matrix q;      // cols x k, orthonormal columns
};

struct SymmetricEigen {
  Vector values;   // non-increasing
  Matrix vectors;  // orthonormal columns, vectors.col(j) pairs with values(j)
};

/// Thin SVD, k = min(rows, cols). Each left singular vector is signed so that
/// its largest-magnitude entry is positive; q follows u.
SvdResult svd(const Matrix& w);

/// Eigendecomposition of a symmetric matrix, sorted by decreasing eigenvalue.
SymmetricEigen eig_sym(const Matrix& s);

/// Moore-Penrose pseudoinverse. Reciprocals of singular values at or below
/// `tol` are zeroed; the default is 1e-10 times the largest singular value.
Matrix pinv(const Matrix& a, std::optional<double> tol = std::nullopt);

/// Minimum-norm least-squares solution X of coeffs * X = rhs.
Matrix lstsq(const Matrix& coeffs, const Matrix& rhs);

/// Flip column signs so that each column's largest-magnitude entry is positive.
/// Returns the applied signs (+1 / -1) per column.
Vector canonicalize_signs(Matrix& columns);

bool is_finite(const Matrix& m);

}  // namespace stbg
