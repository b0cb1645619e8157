#pragma once

#include <vector>

#include "stbg/features.hpp"
#include "stbg/subspace.hpp"

namespace stbg {

struct ResidualPair {
  Vector omega;    // appearance residual, length m
  Vector epsilon;  // state residual, length d_eps (empty when d_eps = 0)
  Vector z_prime;  // projected state, length d
};

struct BrickLabel {
  bool is_background = true;
  std::vector<bool> voxel_mask;  // (t, y, x) order, true = foreground
};

struct SegmentThresholds {
  double t_eps = 3.0;
  double t_omega = 3.0;
};

ResidualPair compute_residuals(const SubspaceModel& model, const Vector& v);

/// Applies the state-residual test, then labels voxels of a non-background
/// brick. In rgb mode a voxel is foreground when any of its `channels`
/// residual entries exceeds t_omega in magnitude; in cs_stltp mode every voxel
/// of a non-background brick is foreground.
BrickLabel classify(const ResidualPair& residuals, const SegmentThresholds& thresholds,
                    DescriptorMode mode, const BrickGeometry& dims, int channels);

}  // namespace stbg
