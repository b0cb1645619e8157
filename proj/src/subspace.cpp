#include "stbg/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stbg/errors.hpp"

namespace stbg {

Matrix StateRing::as_columns() const {
  if (states_.empty()) return {};
  Matrix out(states_.front().size(), static_cast<Eigen::Index>(states_.size()));
  for (std::size_t i = 0; i < states_.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = states_[i];
  }
  return out;
}

std::size_t select_dim(const Vector& values, double threshold, std::size_t floor) {
  if (values.size() == 0) throw InvalidInput("select_dim: no singular values given");
  std::size_t count = 0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) > threshold) count = static_cast<std::size_t>(k) + 1;
  }
  return std::clamp(count, std::min(floor, static_cast<std::size_t>(values.size())),
                    static_cast<std::size_t>(values.size()));
}

Dynamics fit_dynamics(const Matrix& states, double t_deps, const std::vector<bool>& observed) {
  const Eigen::Index d = states.rows();
  const Eigen::Index pairs = states.cols() - 1;
  if (pairs < 1) throw InsufficientData("fit_dynamics: need at least two states");
  if (!observed.empty() && static_cast<Eigen::Index>(observed.size()) != states.cols()) {
    throw InvalidInput("fit_dynamics: observed flags do not match the state count");
  }

  // Only pairs whose later state was observed enter the fit.
  Matrix past(d, pairs);
  Matrix next(d, pairs);
  Eigen::Index kept = 0;
  for (Eigen::Index k = 0; k < pairs; ++k) {
    if (!observed.empty() && !observed[static_cast<std::size_t>(k + 1)]) continue;
    past.col(kept) = states.col(k);
    next.col(kept) = states.col(k + 1);
    ++kept;
  }
  Dynamics out;
  // A filtered fit needs at least d pairs to determine A.
  if (kept == 0 || (!observed.empty() && kept < d)) return out;
  past.conservativeResize(Eigen::NoChange, kept);
  next.conservativeResize(Eigen::NoChange, kept);

  // A * past = next  <=>  past^T * A^T = next^T.
  out.a = lstsq(past.transpose(), next.transpose()).transpose();
  const Matrix residual = next - out.a * past;
  const SvdResult e = svd(residual);
  const auto d_eps = static_cast<Eigen::Index>(
      std::min<std::size_t>(select_dim(e.sigma, t_deps, 0), static_cast<std::size_t>(d)));
  out.b = e.u.leftCols(d_eps) * e.sigma.head(d_eps).asDiagonal() /
          std::sqrt(static_cast<double>(residual.cols()));
  return out;
}

SubspaceModel learn_initial(std::span<const Vector> bricks, const SubspaceParams& params) {
  const std::size_t n = bricks.size();
  if (n < 2) {
    throw InsufficientData("learn_initial: need at least 2 bricks, got " + std::to_string(n));
  }
  const Eigen::Index m = bricks.front().size();
  Matrix w(m, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (bricks[i].size() != m) throw InvalidInput("learn_initial: descriptor lengths differ");
    w.col(static_cast<Eigen::Index>(i)) = bricks[i];
  }

  const SvdResult f = svd(w);
  if (!(params.dim_scale > 0.0)) throw InvalidInput("learn_initial: dim_scale must be positive");
  const auto d = static_cast<Eigen::Index>(select_dim(f.sigma / params.dim_scale, params.t_d, 1));

  SubspaceModel model{f.u.leftCols(d), f.sigma.head(d).array().square() / static_cast<double>(n),
                      Matrix(), Matrix(), Matrix(), StateRing(params.span), Vector()};

  const Matrix z = f.sigma.head(d).asDiagonal() * f.q.leftCols(d).transpose();
  const Dynamics dyn = fit_dynamics(z, params.t_deps);
  model.a = dyn.a;
  model.b = dyn.b;
  model.b_pinv = pinv(model.b);

  const std::size_t keep = std::min(params.span, n);
  for (std::size_t i = n - keep; i < n; ++i) {
    model.states.push(z.col(static_cast<Eigen::Index>(i)));
  }
  model.z_latest = z.col(static_cast<Eigen::Index>(n) - 1);
  return model;
}

}  // namespace stbg
