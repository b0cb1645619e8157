#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stbg/features.hpp"
#include "stbg/segmentation.hpp"
#include "stbg/subspace.hpp"

namespace stbg {

/// Every tunable of the method. Unset residual thresholds resolve to the
/// per-mode defaults (cs_stltp: T_omega = 3, T_eps = 3; rgb: 5 and 4).
struct Config {
  DescriptorMode mode = DescriptorMode::cs_stltp;
  BrickGeometry brick;
  int stride = 0;  // temporal step between bricks; 0 means the brick depth
  double tau = 0.2;
  double t_d = 0.5;
  double t_deps = 0.5;
  std::optional<double> t_eps;
  std::optional<double> t_omega;
  double t_rgb = 5.0;  // per-pixel refinement threshold (cs_stltp only)
  double alpha = 0.05;
  double beta = 2.3849;
  std::size_t span = 60;
  int init_frames = 50;
  int min_area = 20;
  int threads = 0;  // 0 means hardware concurrency
  // Dimension thresholds t_d compare singular values in units of the
  // descriptor's full scale (255 for rgb, the per-channel histogram mass for
  // cs_stltp) instead of raw descriptor units.
  bool scaled_dim_threshold = true;

  double eps_threshold() const;
  double omega_threshold() const;
  int temporal_stride() const { return stride > 0 ? stride : brick.depth; }
  SubspaceParams subspace_params() const;
  /// Full-scale value of one descriptor entry for the current mode.
  double descriptor_full_scale() const;
  SegmentThresholds thresholds() const { return {eps_threshold(), omega_threshold()}; }

  /// Throws InvalidInput on out-of-range values.
  void validate() const;
};

struct MaskFrame {
  int frame_index = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;  // row-major, 1 = foreground

  MaskFrame() = default;
  MaskFrame(int index, int w, int h)
      : frame_index(index), width(w), height(h),
        labels(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t foreground_count() const;
};

/// Accumulated worker time per stage, in seconds.
struct StageTimings {
  double descriptor = 0.0;
  double segmentation = 0.0;
  double refinement = 0.0;
  double maintenance = 0.0;
  double assembly = 0.0;
  std::size_t frames = 0;
};

struct GridCell {
  int grid_x = 0;
  int grid_y = 0;
  int x0 = 0;  // brick origin, anchored inside the frame
  int y0 = 0;
  SubspaceModel model;
};

struct SceneState {
  Config config;
  int width = 0;
  int height = 0;
  int channels = 0;
  int grid_cols = 0;
  int grid_rows = 0;
  std::vector<GridCell> grid;     // row-major over (grid_y, grid_x)
  std::vector<float> aux_bg_mean;  // width * height * channels
  std::vector<Frame> history;     // trailing frames needed by the next step
  int next_frame = 0;
  StageTimings timings;

  GridCell& cell(int gx, int gy) { return grid[static_cast<std::size_t>(gy) * grid_cols + gx]; }
  const GridCell& cell(int gx, int gy) const {
    return grid[static_cast<std::size_t>(gy) * grid_cols + gx];
  }
};

/// Learns one model per grid location from the first frames of a video.
SceneState initialize(std::span<const Frame> frames, const Config& config);

/// Consumes exactly `temporal_stride()` frames and returns their masks after
/// post-processing.
std::vector<MaskFrame> step(SceneState& state, std::span<const Frame> frames);

/// Per-voxel check of a flagged brick against the running background mean:
/// foreground iff the largest channel deviation exceeds t_rgb.
std::vector<bool> refine_pixels(const VideoBrick& brick, std::span<const float> aux_bg_mean,
                                double t_rgb);

/// Streaming front end: buffers the initialization frames, then steps one
/// batch at a time. Initialization frames get all-background masks.
class VideoSegmenter {
public:
  explicit VideoSegmenter(Config config);

  /// Feeds one frame; returns the masks that became available, in order.
  std::vector<MaskFrame> push(Frame frame);

  /// Emits masks for buffered frames. A partial batch is padded by repeating
  /// its last frame; the padding produces no masks.
  std::vector<MaskFrame> finish();

  bool initialized() const { return state_.has_value(); }
  const SceneState& state() const { return *state_; }
  SceneState& state() { return *state_; }

private:
  std::vector<MaskFrame> start(std::vector<Frame> init);

  Config config_;
  std::vector<Frame> pending_;
  std::optional<SceneState> state_;
};

std::vector<MaskFrame> segment_video(std::span<const Frame> frames, const Config& config);

/// Clears 8-connected foreground components with fewer than `min_area` pixels.
MaskFrame postprocess(const MaskFrame& mask, int min_area);

}  // namespace stbg
