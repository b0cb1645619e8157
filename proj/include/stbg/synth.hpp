#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stbg/features.hpp"
#include "stbg/pipeline.hpp"

namespace stbg {

enum class BackgroundKind { constant, gaussian_noise, planted_arma };
enum class IlluminationKind { none, step, ramp };

/// A rectangle moving on a straight line, visible on frames [enter, exit].
struct MovingObject {
  int width = 24;
  int height = 24;
  std::vector<float> color;  // one value per channel
  double x = 0.0;            // top-left corner at frame `enter`
  double y = 0.0;
  double vx = 0.0;  // pixels per frame
  double vy = 0.0;
  int enter = 0;
  int exit = -1;  // -1 means the last frame

  /// Integer top-left corner on frame `frame`.
  std::pair<int, int> corner(int frame) const;
};

struct SceneScript {
  int width = 352;
  int height = 288;
  int channels = 3;
  int frame_count = 200;
  std::uint64_t seed = 1;

  BackgroundKind background = BackgroundKind::gaussian_noise;
  std::vector<float> level{128.0F, 128.0F, 128.0F};  // per channel
  double noise_sigma = 0.0;

  // Planted ARMA texture, tiled per brick over the frame.
  BrickGeometry arma_brick;
  int arma_dim = 3;
  double arma_amplitude = 20.0;
  double arma_angle = 0.3;  // rotation per brick step, radians

  IlluminationKind illumination = IlluminationKind::none;
  double gain = 1.0;
  int step_frame = 0;
  double ramp_rate = 0.0;  // gain increase per frame for ramps

  std::vector<MovingObject> objects;

  /// Throws InvalidInput on bad sizes or trajectories leaving the frame.
  void validate() const;
};

/// Planted appearance basis and dynamics of an ARMA background.
struct PlantedArma {
  Matrix basis;      // m x d, orthonormal, first column constant
  Matrix dynamics;   // d x d
  Vector initial;    // state of the first brick at location (0, 0)
};

/// Deterministic renderer: each frame depends only on the script and its index.
class SceneRenderer {
public:
  explicit SceneRenderer(SceneScript script);

  const SceneScript& script() const { return script_; }
  int frame_count() const { return script_.frame_count; }
  const PlantedArma& planted() const { return arma_; }

  Frame frame(int index) const;
  MaskFrame truth(int index) const;

  /// Multiplicative illumination gain applied on frame `index`.
  double gain_at(int index) const;

  /// State of the planted texture at grid location (gx, gy) for brick `b`.
  Vector arma_state(int gx, int gy, int b) const;

private:
  SceneScript script_;
  PlantedArma arma_;
};

struct RenderedScene {
  std::vector<Frame> frames;
  std::vector<MaskFrame> truth;
};

RenderedScene render(const SceneScript& script);

/// Copy of `base` with a gain step to `gain` from `step_frame` onward.
SceneScript illumination_scene(const SceneScript& base, double gain, int step_frame);

/// Parses the key = value script format (see scenes/*.script).
SceneScript parse_scene_script(const std::string& text);
SceneScript load_scene_script(const std::string& path);

}  // namespace stbg
