#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "stbg/numerics.hpp"

namespace stbg {

/// One video frame with intensities in [0, 255], interleaved channels.
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> pixels;

  Frame() = default;
  Frame(int w, int h, int c, float fill = 0.0F)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  float& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool same_shape(const Frame& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

/// Read-only view over consecutive frames with clamp-to-edge addressing.
class FrameVolume {
public:
  FrameVolume() = default;
  explicit FrameVolume(std::span<const Frame> frames);

  int width() const { return frames_.empty() ? 0 : frames_.front().width; }
  int height() const { return frames_.empty() ? 0 : frames_.front().height; }
  int channels() const { return frames_.empty() ? 0 : frames_.front().channels; }
  int depth() const { return static_cast<int>(frames_.size()); }

  /// Intensity at (x, y, t, c); out-of-range coordinates clamp to the border.
  float clamped(int x, int y, int t, int c) const;
  float at(int x, int y, int t, int c) const { return frames_[t].at(x, y, c); }

private:
  std::span<const Frame> frames_;
};

struct BrickGeometry {
  int width = 4;
  int height = 4;
  int depth = 5;

  int voxels() const { return width * height * depth; }
};

/// A w x h x t block of the video at a fixed grid location. The volume may
/// extend beyond the brick; CS-STLTP reads neighbours from it.
struct VideoBrick {
  FrameVolume volume;
  int x0 = 0;
  int y0 = 0;
  int t0 = 0;
  BrickGeometry dims;
};

enum class DescriptorMode { cs_stltp, rgb };

/// 16 trits: four planes, four centre-symmetric comparisons each.
using TernaryPattern = std::array<std::int8_t, 16>;

inline constexpr int kPatternBins = 48;
inline constexpr int kPlanes = 4;

/// Ternary comparison s_tau(p_m, p_s). Equality within a relative 1e-6 of the
/// larger operand counts as a tie, so the result is invariant to a common
/// positive scale of both operands.
int ternary_compare(double p_m, double p_s, double tau);

/// Pattern at (x, y, t) in channel `c`. Planes contain the Y axis and are
/// oriented at 0, 45, 90 and 135 degrees in the X-T subspace.
TernaryPattern cs_stltp_pixel(const FrameVolume& volume, int x, int y, int t,
                              int c, double tau);

/// Number of unequal adjacent trits times 3 plus the sign class of the sum.
int pattern_to_bin(const TernaryPattern& p);

struct BrickDescriptor {
  Vector values;
  DescriptorMode mode = DescriptorMode::cs_stltp;
};

/// Descriptor length for a brick geometry, mode and channel count.
int descriptor_length(DescriptorMode mode, const BrickGeometry& dims, int channels);

BrickDescriptor brick_descriptor(const VideoBrick& brick, DescriptorMode mode,
                                 double tau);

}  // namespace stbg
