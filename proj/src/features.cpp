#include "stbg/features.hpp"

#include <algorithm>
#include <cmath>

#include "stbg/errors.hpp"

namespace stbg {

namespace {

struct PlaneAxis {
  int dx;
  int dt;
};

// In-plane direction (besides Y) for each of the four planes.
constexpr std::array<PlaneAxis, kPlanes> kPlaneAxes{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

// First half of the 3x3 ring, walked counter-clockwise as (along axis, along
// Y). Entry m pairs with its point reflection (-a, -b).
constexpr std::array<std::array<int, 2>, 4> kRingHalf{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

}  // namespace

FrameVolume::FrameVolume(std::span<const Frame> frames) : frames_(frames) {
  for (const Frame& f : frames_) {
    if (!f.same_shape(frames_.front())) {
      throw InvalidInput("FrameVolume: frames differ in size or channel count");
    }
  }
}

float FrameVolume::clamped(int x, int y, int t, int c) const {
  x = std::clamp(x, 0, width() - 1);
  y = std::clamp(y, 0, height() - 1);
  t = std::clamp(t, 0, depth() - 1);
  return frames_[t].at(x, y, c);
}

int ternary_compare(double p_m, double p_s, double tau) {
  const double scale = std::max(std::abs(p_m), std::abs(p_s));
  const double slack = 1e-6 * scale;
  if (p_m - (1.0 + tau) * p_s > slack) return 1;
  if ((1.0 - tau) * p_s - p_m > slack) return -1;
  return 0;
}

TernaryPattern cs_stltp_pixel(const FrameVolume& volume, int x, int y, int t,
                              int c, double tau) {
  TernaryPattern out{};
  for (int j = 0; j < kPlanes; ++j) {
    const PlaneAxis axis = kPlaneAxes[j];
    for (int m = 0; m < 4; ++m) {
      const int a = kRingHalf[m][0];
      const int b = kRingHalf[m][1];
      const double p_m = volume.clamped(x + a * axis.dx, y + b, t + a * axis.dt, c);
      const double p_s = volume.clamped(x - a * axis.dx, y - b, t - a * axis.dt, c);
      out[j * 4 + m] = static_cast<std::int8_t>(ternary_compare(p_m, p_s, tau));
    }
  }
  return out;
}

int pattern_to_bin(const TernaryPattern& p) {
  int transitions = 0;
  int sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sum += p[i];
    if (i > 0 && p[i] != p[i - 1]) ++transitions;
  }
  const int sign_class = (sum > 0) - (sum < 0) + 1;
  return transitions * 3 + sign_class;
}

int descriptor_length(DescriptorMode mode, const BrickGeometry& dims, int channels) {
  return mode == DescriptorMode::cs_stltp ? kPatternBins * channels
                                          : dims.voxels() * channels;
}

BrickDescriptor brick_descriptor(const VideoBrick& brick, DescriptorMode mode,
                                 double tau) {
  const FrameVolume& vol = brick.volume;
  const BrickGeometry& g = brick.dims;
  const int channels = vol.channels();
  if (brick.x0 < 0 || brick.y0 < 0 || brick.t0 < 0 ||
      brick.x0 + g.width > vol.width() || brick.y0 + g.height > vol.height() ||
      brick.t0 + g.depth > vol.depth()) {
    throw InvalidInput("brick_descriptor: brick lies outside its volume");
  }

  BrickDescriptor out;
  out.mode = mode;
  out.values = Vector::Zero(descriptor_length(mode, g, channels));

  if (mode == DescriptorMode::rgb) {
    Eigen::Index k = 0;
    for (int dt = 0; dt < g.depth; ++dt)
      for (int dy = 0; dy < g.height; ++dy)
        for (int dx = 0; dx < g.width; ++dx)
          for (int c = 0; c < channels; ++c)
            out.values(k++) = vol.at(brick.x0 + dx, brick.y0 + dy, brick.t0 + dt, c);
    return out;
  }

  if (tau <= 0.0) throw InvalidInput("brick_descriptor: tau must be positive");
  for (int c = 0; c < channels; ++c) {
    for (int dt = 0; dt < g.depth; ++dt)
      for (int dy = 0; dy < g.height; ++dy)
        for (int dx = 0; dx < g.width; ++dx) {
          const TernaryPattern p = cs_stltp_pixel(vol, brick.x0 + dx, brick.y0 + dy,
                                                  brick.t0 + dt, c, tau);
          // One count per plane.
          out.values(c * kPatternBins + pattern_to_bin(p)) += kPlanes;
        }
  }
  return out;
}

}  // namespace stbg
