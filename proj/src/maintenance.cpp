#include "stbg/maintenance.hpp"

#include <algorithm>
#include <cmath>

#include "stbg/errors.hpp"

namespace stbg {

namespace {

// Orthonormalizes the columns of `basis` in order, two Gram-Schmidt passes.
// A column that vanishes against its predecessors is replaced by the first
// candidate (from `fallback`, then the coordinate axes) that does not.
void orthonormalize(Matrix& basis, const Matrix& fallback) {
  const Eigen::Index m = basis.rows();
  auto project_out = [&](Vector& v, Eigen::Index upto) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < upto; ++i) v -= basis.col(i).dot(v) * basis.col(i);
    }
  };
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Vector v = basis.col(j);
    const double before = v.norm();
    project_out(v, j);
    double norm = v.norm();
    if (!(norm > 1e-8 * before) || norm == 0.0) {
      for (Eigen::Index k = 0; k < fallback.cols() + m; ++k) {
        v = k < fallback.cols() ? Vector(fallback.col(k)) : Vector(Vector::Unit(m, k - fallback.cols()));
        project_out(v, j);
        norm = v.norm();
        if (norm > 1e-6) break;
      }
    }
    basis.col(j) = v / norm;
  }
}

}  // namespace

Vector synthesize(const SubspaceModel& model) {
  return model.c * (model.a * model.z_latest);
}

Vector compose(const Vector& v_new, const BrickLabel& label, const Vector& v_hat,
               DescriptorMode mode, int channels) {
  if (v_new.size() != v_hat.size()) {
    throw InvalidInput("compose: observation and prediction lengths differ");
  }
  if (mode == DescriptorMode::cs_stltp) {
    return label.is_background ? v_new : v_hat;
  }
  if (static_cast<Eigen::Index>(label.voxel_mask.size()) * channels != v_new.size()) {
    throw InvalidInput("compose: voxel mask does not match descriptor length");
  }
  Vector out = v_new;
  for (std::size_t i = 0; i < label.voxel_mask.size(); ++i) {
    if (!label.voxel_mask[i]) continue;
    const auto first = static_cast<Eigen::Index>(i) * channels;
    out.segment(first, channels) = v_hat.segment(first, channels);
  }
  return out;
}

double robust_weight(double r, double rho) {
  const double ratio = r / rho;
  return 1.0 / (1.0 + ratio * ratio);
}

Vector robust_scale(const SubspaceModel& model, double beta) {
  const Vector scaled = beta * model.lambda.cwiseMax(0.0).cwiseSqrt();
  Vector rho = (model.c.cwiseAbs() * scaled.asDiagonal()).rowwise().maxCoeff();
  return rho.cwiseMax(kRhoFloor);
}

Reweighted robust_reweight(const SubspaceModel& model, const Vector& v_bar, double beta) {
  if (beta <= 0.0) throw InvalidInput("robust_reweight: beta must be positive");
  if (v_bar.size() != model.descriptor_length()) {
    throw InvalidInput("robust_reweight: descriptor length mismatch");
  }
  const Vector residual = model.c * (model.c.transpose() * v_bar) - v_bar;
  const Vector rho = robust_scale(model, beta);

  Reweighted out{Vector(v_bar.size()), Vector(v_bar.size())};
  for (Eigen::Index k = 0; k < v_bar.size(); ++k) {
    out.weights(k) = robust_weight(residual(k), rho(k));
    out.v_tilde(k) = std::sqrt(out.weights(k)) * v_bar(k);
  }
  return out;
}

void update_appearance(SubspaceModel& model, const Vector& v_tilde, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw InvalidInput("update_appearance: alpha must lie in [0, 1)");
  }
  const Eigen::Index m = model.descriptor_length();
  const Eigen::Index d = model.dim();
  if (v_tilde.size() != m) throw InvalidInput("update_appearance: descriptor length mismatch");

  Matrix y(m, d + 1);
  for (Eigen::Index j = 0; j < d; ++j) {
    y.col(j) = std::sqrt((1.0 - alpha) * std::max(model.lambda(j), 0.0)) * model.c.col(j);
  }
  y.col(d) = std::sqrt(alpha) * v_tilde;

  const SymmetricEigen small = eig_sym(y.transpose() * y);

  Matrix basis = y * small.vectors.leftCols(d);
  orthonormalize(basis, model.c);
  canonicalize_signs(basis);

  model.c = std::move(basis);
  model.lambda = small.values.head(d).cwiseMax(0.0);
}

void update_dynamics(SubspaceModel& model, const Vector& z_new, double t_deps, bool observed) {
  if (z_new.size() != model.dim()) throw InvalidInput("update_dynamics: state length mismatch");
  model.states.push(z_new, observed);
  model.z_latest = z_new;
  if (model.states.size() < 2) return;

  const Dynamics dyn = fit_dynamics(model.states.as_columns(), t_deps, model.states.observed_flags());
  if (dyn.a.rows() != model.dim()) return;
  model.a = dyn.a;
  if (dyn.b.rows() == model.dim()) {
    model.b = dyn.b;
    model.b_pinv = pinv(model.b);
  }
}

}  // namespace stbg
