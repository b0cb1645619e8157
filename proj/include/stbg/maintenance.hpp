#pragma once

#include "stbg/segmentation.hpp"
#include "stbg/subspace.hpp"

namespace stbg {

inline constexpr double kRhoFloor = 1e-9;

/// Noise-free brick C * A * z_latest.
Vector synthesize(const SubspaceModel& model);

/// Replaces foreground content of `v_new` by the prediction `v_hat`.
Vector compose(const Vector& v_new, const BrickLabel& label, const Vector& v_hat,
               DescriptorMode mode, int channels);

/// w(r) = 1 / (1 + (r / rho)^2).
double robust_weight(double r, double rho);

/// Per-dimension scale rho_k = max_j beta * sqrt(lambda_j) * |C(k, j)|,
/// floored at kRhoFloor.
Vector robust_scale(const SubspaceModel& model, double beta);

struct Reweighted {
  Vector v_tilde;
  Vector weights;
};

Reweighted robust_reweight(const SubspaceModel& model, const Vector& v_bar, double beta);

/// Rank-one covariance update (1 - alpha) C Lambda C^T + alpha v v^T through
/// the (d+1) x (d+1) Gram matrix, keeping the top d eigenpairs.
void update_appearance(SubspaceModel& model, const Vector& v_tilde, double alpha);

/// Appends z_new, refits A and B over the buffered states and makes z_new the
/// latest state. With fewer than two buffered states A and B are unchanged.
/// `observed` is false when z_new comes from a brick whose content was
/// replaced by the model's own prediction; A and B are estimated from
/// transitions into observed states only and kept as is while none are
/// buffered.
void update_dynamics(SubspaceModel& model, const Vector& z_new, double t_deps,
                     bool observed = true);

}  // namespace stbg
