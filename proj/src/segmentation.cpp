#include "stbg/segmentation.hpp"

#include <cmath>
#include <string>

#include "stbg/errors.hpp"

namespace stbg {

ResidualPair compute_residuals(const SubspaceModel& model, const Vector& v) {
  if (v.size() != model.descriptor_length()) {
    throw InvalidInput("compute_residuals: descriptor length " + std::to_string(v.size()) +
                       " does not match model length " +
                       std::to_string(model.descriptor_length()));
  }
  ResidualPair out;
  out.z_prime = model.c.transpose() * v;
  out.omega = v - model.c * out.z_prime;
  if (model.noise_dim() > 0) {
    out.epsilon = model.b_pinv * (out.z_prime - model.a * model.z_latest);
  } else {
    out.epsilon.resize(0);
  }
  return out;
}

BrickLabel classify(const ResidualPair& residuals, const SegmentThresholds& thresholds,
                    DescriptorMode mode, const BrickGeometry& dims, int channels) {
  if (thresholds.t_eps <= 0.0 || thresholds.t_omega <= 0.0) {
    throw InvalidInput("classify: thresholds must be positive");
  }
  const int voxels = dims.voxels();
  BrickLabel label;
  label.voxel_mask.assign(static_cast<std::size_t>(voxels), false);

  if (residuals.epsilon.size() > 0) {
    label.is_background = residuals.epsilon.cwiseAbs().maxCoeff() < thresholds.t_eps;
  } else {
    // No state residual: the appearance residual alone decides.
    label.is_background = residuals.omega.size() == 0 ||
                          residuals.omega.cwiseAbs().maxCoeff() < thresholds.t_omega;
  }
  if (label.is_background) return label;

  if (mode == DescriptorMode::cs_stltp) {
    label.voxel_mask.assign(static_cast<std::size_t>(voxels), true);
    return label;
  }

  if (residuals.omega.size() != static_cast<Eigen::Index>(voxels) * channels) {
    throw InvalidInput("classify: rgb residual length does not match brick geometry");
  }
  for (int i = 0; i < voxels; ++i) {
    for (int c = 0; c < channels; ++c) {
      if (std::abs(residuals.omega(i * channels + c)) > thresholds.t_omega) {
        label.voxel_mask[static_cast<std::size_t>(i)] = true;
        break;
      }
    }
  }
  return label;
}

}  // namespace stbg
