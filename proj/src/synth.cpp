#include "stbg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "stbg/errors.hpp"
#include "stbg/keyvalue.hpp"

namespace stbg {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

PlantedArma plant_arma(const SceneScript& s) {
  const int m = s.arma_brick.voxels() * s.channels;
  const int d = std::clamp(s.arma_dim, 1, m);
  std::mt19937_64 rng(mix_seed(s.seed, 0xA11AULL));
  std::normal_distribution<double> normal(0.0, 1.0);

  PlantedArma out;
  out.basis = Matrix(m, d);
  out.basis.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
  for (int j = 1; j < d; ++j) {
    Vector v(m);
    for (int k = 0; k < m; ++k) v(k) = normal(rng);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) v -= out.basis.col(i).dot(v) * out.basis.col(i);
    out.basis.col(j) = v.normalized();
  }

  // Constant mean, then rotating pairs, then a decaying remainder.
  out.dynamics = Matrix::Zero(d, d);
  out.dynamics(0, 0) = 1.0;
  int j = 1;
  for (int pair = 1; j + 1 < d; j += 2, ++pair) {
    const double angle = s.arma_angle * pair;
    out.dynamics(j, j) = std::cos(angle);
    out.dynamics(j, j + 1) = -std::sin(angle);
    out.dynamics(j + 1, j) = std::sin(angle);
    out.dynamics(j + 1, j + 1) = std::cos(angle);
  }
  if (j < d) out.dynamics(j, j) = 0.95;

  double mean_level = 0.0;
  for (float l : s.level) mean_level += l;
  mean_level /= static_cast<double>(s.level.size());
  out.initial = Vector::Zero(d);
  out.initial(0) = mean_level * std::sqrt(static_cast<double>(m));
  for (int k = 1; k < d; ++k) out.initial(k) = s.arma_amplitude * std::sqrt(static_cast<double>(m) / (d - 1));
  return out;
}

BackgroundKind parse_background(const std::string& v) {
  if (v == "constant") return BackgroundKind::constant;
  if (v == "noise" || v == "gaussian_noise") return BackgroundKind::gaussian_noise;
  if (v == "arma" || v == "planted_arma") return BackgroundKind::planted_arma;
  throw InvalidInput("background: unknown kind '" + v + "'");
}

IlluminationKind parse_illumination(const std::string& v) {
  if (v == "none") return IlluminationKind::none;
  if (v == "step") return IlluminationKind::step;
  if (v == "ramp") return IlluminationKind::ramp;
  throw InvalidInput("illumination: unknown kind '" + v + "'");
}

BrickGeometry parse_brick(const std::string& v) {
  const auto parts = split(v, 'x');
  if (parts.size() != 3) throw InvalidInput("brick: expected WxHxT, got '" + v + "'");
  return {static_cast<int>(to_integer(parts[0], "brick")), static_cast<int>(to_integer(parts[1], "brick")),
          static_cast<int>(to_integer(parts[2], "brick"))};
}

// "24x24 color=40,50,70 at=10,132 velocity=1,0 enter=50 exit=199"
MovingObject parse_object(const std::string& v) {
  MovingObject obj;
  std::vector<std::string> tokens;
  for (const std::string& t : split(v, ' ')) {
    if (!t.empty()) tokens.push_back(t);
  }
  if (tokens.empty()) throw InvalidInput("object: empty description");
  const auto size = split(tokens[0], 'x');
  if (size.size() != 2) throw InvalidInput("object: size must be WxH, got '" + tokens[0] + "'");
  obj.width = static_cast<int>(to_integer(size[0], "object width"));
  obj.height = static_cast<int>(to_integer(size[1], "object height"));
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos) throw InvalidInput("object: expected name=value, got '" + tokens[i] + "'");
    const std::string name = tokens[i].substr(0, eq);
    const std::string val = tokens[i].substr(eq + 1);
    if (name == "color") {
      obj.color.clear();
      for (double c : to_doubles(val, "object color")) obj.color.push_back(static_cast<float>(c));
    } else if (name == "at") {
      const auto xy = to_doubles(val, "object at");
      if (xy.size() != 2) throw InvalidInput("object: at=X,Y");
      obj.x = xy[0];
      obj.y = xy[1];
    } else if (name == "velocity") {
      const auto vxy = to_doubles(val, "object velocity");
      if (vxy.size() != 2) throw InvalidInput("object: velocity=VX,VY");
      obj.vx = vxy[0];
      obj.vy = vxy[1];
    } else if (name == "enter") {
      obj.enter = static_cast<int>(to_integer(val, "object enter"));
    } else if (name == "exit") {
      obj.exit = static_cast<int>(to_integer(val, "object exit"));
    } else {
      throw InvalidInput("object: unknown attribute '" + name + "'");
    }
  }
  return obj;
}

}  // namespace

std::pair<int, int> MovingObject::corner(int frame) const {
  const double dt = frame - enter;
  return {static_cast<int>(std::floor(x + vx * dt + 0.5)), static_cast<int>(std::floor(y + vy * dt + 0.5))};
}

void SceneScript::validate() const {
  if (width < 1 || height < 1 || frame_count < 1) throw InvalidInput("scene: sizes must be positive");
  if (channels != 1 && channels != 3) throw InvalidInput("scene: channels must be 1 or 3");
  if (static_cast<int>(level.size()) != channels && level.size() != 1) {
    throw InvalidInput("scene: level needs 1 or " + std::to_string(channels) + " values");
  }
  if (noise_sigma < 0.0) throw InvalidInput("scene: noise_sigma must be non-negative");
  if (gain <= 0.0) throw InvalidInput("scene: gain must be positive");
  if (background == BackgroundKind::planted_arma && (arma_dim < 1 || arma_brick.voxels() < 1)) {
    throw InvalidInput("scene: arma_dim and arma_brick must be positive");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const MovingObject& o = objects[i];
    const std::string tag = "scene: object " + std::to_string(i);
    if (o.width < 1 || o.height < 1 || o.width > width || o.height > height) {
      throw InvalidInput(tag + " does not fit in the frame");
    }
    if (static_cast<int>(o.color.size()) != channels && o.color.size() != 1) {
      throw InvalidInput(tag + " color needs 1 or " + std::to_string(channels) + " values");
    }
    const int last = o.exit < 0 ? frame_count - 1 : o.exit;
    if (o.enter < 0 || last < o.enter) throw InvalidInput(tag + " has an empty frame range");
    for (int f : {o.enter, last}) {
      const auto [cx, cy] = o.corner(f);
      if (cx < 0 || cy < 0 || cx + o.width > width || cy + o.height > height) {
        throw InvalidInput(tag + " leaves the frame at frame " + std::to_string(f));
      }
    }
  }
}

SceneRenderer::SceneRenderer(SceneScript script) : script_(std::move(script)) {
  script_.validate();
  if (script_.level.size() == 1) script_.level.assign(static_cast<std::size_t>(script_.channels), script_.level[0]);
  for (MovingObject& o : script_.objects) {
    if (o.color.size() == 1) o.color.assign(static_cast<std::size_t>(script_.channels), o.color[0]);
    if (o.exit < 0) o.exit = script_.frame_count - 1;
  }
  if (script_.background == BackgroundKind::planted_arma) arma_ = plant_arma(script_);
}

double SceneRenderer::gain_at(int index) const {
  const SceneScript& s = script_;
  if (s.illumination == IlluminationKind::none || index < s.step_frame) return 1.0;
  if (s.illumination == IlluminationKind::step) return s.gain;
  const double g = 1.0 + s.ramp_rate * (index - s.step_frame);
  return s.gain >= 1.0 ? std::min(g, s.gain) : std::max(g, s.gain);
}

Vector SceneRenderer::arma_state(int gx, int gy, int b) const {
  const Eigen::Index d = arma_.dynamics.rows();
  Vector z = arma_.initial;
  // Per-location phase offset of the rotating components.
  const double phase = 0.7 * gx + 1.3 * gy;
  for (Eigen::Index j = 1; j + 1 < d; j += 2) {
    const double r = z(j);
    z(j) = r * std::cos(phase * static_cast<double>(j));
    z(j + 1) = r * std::sin(phase * static_cast<double>(j));
  }
  for (int k = 0; k < b; ++k) z = arma_.dynamics * z;
  return z;
}

Frame SceneRenderer::frame(int index) const {
  const SceneScript& s = script_;
  if (index < 0 || index >= s.frame_count) throw InvalidInput("scene: frame index out of range");
  Frame f(s.width, s.height, s.channels);

  if (s.background == BackgroundKind::planted_arma) {
    const BrickGeometry& g = s.arma_brick;
    const int b = index / g.depth;
    const int dt = index % g.depth;
    for (int gy = 0; gy * g.height < s.height; ++gy) {
      for (int gx = 0; gx * g.width < s.width; ++gx) {
        const Vector v = arma_.basis * arma_state(gx, gy, b);
        for (int dy = 0; dy < g.height && gy * g.height + dy < s.height; ++dy)
          for (int dx = 0; dx < g.width && gx * g.width + dx < s.width; ++dx)
            for (int c = 0; c < s.channels; ++c) {
              const Eigen::Index k = ((static_cast<Eigen::Index>(dt) * g.height + dy) * g.width + dx) * s.channels + c;
              f.at(gx * g.width + dx, gy * g.height + dy, c) = static_cast<float>(v(k));
            }
      }
    }
  } else {
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x)
        for (int c = 0; c < s.channels; ++c) f.at(x, y, c) = s.level[static_cast<std::size_t>(c)];
  }

  for (const MovingObject& o : s.objects) {
    if (index < o.enter || index > o.exit) continue;
    const auto [cx, cy] = o.corner(index);
    for (int y = cy; y < cy + o.height; ++y)
      for (int x = cx; x < cx + o.width; ++x)
        for (int c = 0; c < s.channels; ++c) f.at(x, y, c) = o.color[static_cast<std::size_t>(c)];
  }

  // Sensor noise covers the whole frame, then illumination, then 8-bit range.
  const bool noisy = s.background != BackgroundKind::constant && s.noise_sigma > 0.0;
  if (noisy) {
    std::mt19937_64 rng(mix_seed(s.seed, static_cast<std::uint64_t>(index) + 1));
    std::normal_distribution<double> normal(0.0, s.noise_sigma);
    for (float& p : f.pixels) p = static_cast<float>(p + normal(rng));
  }
  const double gain = gain_at(index);
  for (float& p : f.pixels) {
    double v = std::clamp(p * gain, 0.0, 255.0);
    if (noisy) v = std::round(v);
    p = static_cast<float>(v);
  }
  return f;
}

MaskFrame SceneRenderer::truth(int index) const {
  MaskFrame m(index, script_.width, script_.height);
  for (const MovingObject& o : script_.objects) {
    if (index < o.enter || index > o.exit) continue;
    const auto [cx, cy] = o.corner(index);
    for (int y = cy; y < cy + o.height; ++y)
      for (int x = cx; x < cx + o.width; ++x) m.at(x, y) = 1;
  }
  return m;
}

RenderedScene render(const SceneScript& script) {
  const SceneRenderer renderer(script);
  RenderedScene out;
  out.frames.reserve(static_cast<std::size_t>(script.frame_count));
  out.truth.reserve(static_cast<std::size_t>(script.frame_count));
  for (int i = 0; i < script.frame_count; ++i) {
    out.frames.push_back(renderer.frame(i));
    out.truth.push_back(renderer.truth(i));
  }
  return out;
}

SceneScript illumination_scene(const SceneScript& base, double gain, int step_frame) {
  if (gain <= 0.0) throw InvalidInput("illumination_scene: gain must be positive");
  SceneScript out = base;
  out.illumination = IlluminationKind::step;
  out.gain = gain;
  out.step_frame = step_frame;
  return out;
}

SceneScript parse_scene_script(const std::string& text) {
  SceneScript s;
  for (const KeyValue& kv : parse_key_values(text)) {
    const std::string& k = kv.key;
    const std::string& v = kv.value;
    if (k == "width") s.width = static_cast<int>(to_integer(v, k));
    else if (k == "height") s.height = static_cast<int>(to_integer(v, k));
    else if (k == "channels") s.channels = static_cast<int>(to_integer(v, k));
    else if (k == "frames") s.frame_count = static_cast<int>(to_integer(v, k));
    else if (k == "seed") s.seed = static_cast<std::uint64_t>(to_integer(v, k));
    else if (k == "background") s.background = parse_background(v);
    else if (k == "level") {
      s.level.clear();
      for (double l : to_doubles(v, k)) s.level.push_back(static_cast<float>(l));
    }
    else if (k == "noise_sigma") s.noise_sigma = to_double(v, k);
    else if (k == "arma_dim") s.arma_dim = static_cast<int>(to_integer(v, k));
    else if (k == "arma_amplitude") s.arma_amplitude = to_double(v, k);
    else if (k == "arma_angle") s.arma_angle = to_double(v, k);
    else if (k == "arma_brick") s.arma_brick = parse_brick(v);
    else if (k == "illumination") s.illumination = parse_illumination(v);
    else if (k == "gain") s.gain = to_double(v, k);
    else if (k == "step_frame") s.step_frame = static_cast<int>(to_integer(v, k));
    else if (k == "ramp_rate") s.ramp_rate = to_double(v, k);
    else if (k == "object") s.objects.push_back(parse_object(v));
    else throw InvalidInput("line " + std::to_string(kv.line) + ": unknown scene key '" + k + "'");
  }
  s.validate();
  return s;
}

SceneScript load_scene_script(const std::string& path) {
  return parse_scene_script(read_text_file(path));
}

}  // namespace stbg
