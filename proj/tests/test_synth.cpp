#include <doctest.h>

#include "stbg/errors.hpp"
#include "stbg/features.hpp"
#include "stbg/subspace.hpp"
#include "stbg/synth.hpp"
#include "test_support.hpp"

using namespace stbg;

namespace {

SceneScript base_scene() {
  SceneScript s;
  s.width = 40;
  s.height = 32;
  s.channels = 3;
  s.frame_count = 30;
  s.seed = 99;
  s.level = {100.0F, 110.0F, 120.0F};
  s.noise_sigma = 4.0;
  return s;
}

}  // namespace

TEST_CASE("constant background without objects") {
  SceneScript s = base_scene();
  s.background = BackgroundKind::constant;
  const RenderedScene r = render(s);
  REQUIRE(r.frames.size() == 30);
  for (const MaskFrame& m : r.truth) CHECK(m.foreground_count() == 0);
  // Noise is ignored for the constant kind.
  CHECK(r.frames[7].at(3, 4, 1) == 110.0F);
}

TEST_CASE("same seed renders bit-identical frames, other seeds differ") {
  const RenderedScene a = render(base_scene());
  const RenderedScene b = render(base_scene());
  for (std::size_t i = 0; i < a.frames.size(); ++i) CHECK(a.frames[i].pixels == b.frames[i].pixels);
  SceneScript other = base_scene();
  other.seed = 100;
  CHECK(render(other).frames[0].pixels != a.frames[0].pixels);
  // Frames are 8-bit values.
  for (float p : a.frames[3].pixels) {
    CHECK(p == std::round(p));
    CHECK(p >= 0.0F);
    CHECK(p <= 255.0F);
  }
}

TEST_CASE("truth masks follow the square footprint") {
  SceneScript s = base_scene();
  s.objects.push_back(MovingObject{8, 6, {10, 20, 30}, 2, 3, 1.0, 0.5, 5, 20});
  const SceneRenderer r(s);
  CHECK(r.truth(4).foreground_count() == 0);
  CHECK(r.truth(21).foreground_count() == 0);
  for (int f = 5; f <= 20; ++f) {
    const MaskFrame m = r.truth(f);
    CHECK(m.foreground_count() == 48);
    const auto [cx, cy] = s.objects[0].corner(f);
    CHECK(m.at(cx, cy) == 1);
    CHECK(m.at(cx + 7, cy + 5) == 1);
  }
  const Frame f = SceneRenderer(s).frame(10);
  const auto [cx, cy] = s.objects[0].corner(10);
  // The object carries sensor noise too, so only check it is near its colour.
  CHECK(std::abs(f.at(cx + 1, cy + 1, 2) - 30.0F) < 30.0F);
}

TEST_CASE("scene validation") {
  SceneScript s = base_scene();
  s.objects.push_back(MovingObject{8, 8, {1, 2, 3}, 30, 0, 1.0, 0.0, 0, -1});
  CHECK_THROWS_AS(render(s), InvalidInput);  // runs off the right edge
  SceneScript c = base_scene();
  c.channels = 2;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  SceneScript l = base_scene();
  l.level = {1.0F, 2.0F};
  CHECK_THROWS_AS(l.validate(), InvalidInput);
  CHECK_THROWS_AS(illumination_scene(base_scene(), 0.0, 3), InvalidInput);
}

TEST_CASE("illumination step") {
  const SceneScript base = base_scene();
  const SceneScript same = illumination_scene(base, 1.0, 10);
  const RenderedScene a = render(base);
  const RenderedScene b = render(same);
  for (std::size_t i = 0; i < a.frames.size(); ++i) CHECK(a.frames[i].pixels == b.frames[i].pixels);

  const SceneRenderer bright(illumination_scene(base, 1.5, 10));
  CHECK(bright.gain_at(9) == 1.0);
  CHECK(bright.gain_at(10) == 1.5);
  CHECK(bright.gain_at(29) == 1.5);

  SceneScript ramp = base;
  ramp.illumination = IlluminationKind::ramp;
  ramp.step_frame = 10;
  ramp.ramp_rate = 0.1;
  ramp.gain = 1.3;
  const SceneRenderer rr(ramp);
  CHECK(rr.gain_at(10) == doctest::Approx(1.0));
  CHECK(rr.gain_at(12) == doctest::Approx(1.2));
  CHECK(rr.gain_at(20) == doctest::Approx(1.3));
}

TEST_CASE("gain step leaves cs descriptors unchanged after the step") {
  SceneScript s = base_scene();
  s.background = BackgroundKind::planted_arma;
  s.noise_sigma = 0.0;
  s.level = {90.0F};
  s.channels = 1;
  const RenderedScene plain = render(s);
  const RenderedScene stepped = render(illumination_scene(s, 1.5, 10));
  const std::span<const Frame> p(plain.frames);
  const std::span<const Frame> q(stepped.frames);
  // Bricks whose temporal neighbourhood lies after the step.
  for (int t0 : {11, 15, 20}) {
    for (int x0 : {0, 8, 36}) {
      const VideoBrick bp{FrameVolume(p), x0, 4, t0, {}};
      const VideoBrick bq{FrameVolume(q), x0, 4, t0, {}};
      CHECK(brick_descriptor(bp, DescriptorMode::cs_stltp, 0.2).values ==
            brick_descriptor(bq, DescriptorMode::cs_stltp, 0.2).values);
      CHECK(brick_descriptor(bp, DescriptorMode::rgb, 0.2).values !=
            brick_descriptor(bq, DescriptorMode::rgb, 0.2).values);
    }
  }
}

TEST_CASE("planted ARMA frames reproduce the planted model") {
  SceneScript s = base_scene();
  s.background = BackgroundKind::planted_arma;
  s.noise_sigma = 0.0;
  s.channels = 1;
  s.level = {120.0F};
  s.frame_count = 60;
  const SceneRenderer r(s);
  const PlantedArma& arma = r.planted();
  CHECK((arma.basis.transpose() * arma.basis - Matrix::Identity(3, 3)).norm() < 1e-12);

  std::vector<Frame> frames;
  for (int i = 0; i < s.frame_count; ++i) frames.push_back(r.frame(i));
  const FrameVolume vol(frames);
  std::vector<Vector> bricks;
  for (int b = 0; b < 12; ++b) {
    const Vector v = brick_descriptor(VideoBrick{vol, 8, 4, b * 5, {}}, DescriptorMode::rgb, 0.2).values;
    const Vector expected = arma.basis * r.arma_state(2, 1, b);
    CHECK((v - expected).cwiseAbs().maxCoeff() < 1e-4);
    bricks.push_back(v);
  }
  const SubspaceModel m = learn_initial(bricks, {});
  REQUIRE(m.dim() == 3);
  CHECK(stbg::testing::max_principal_angle(m.c, arma.basis) < 1e-5);
}

TEST_CASE("scene script parsing") {
  const std::string text =
      "# acceptance-like scene\n"
      "width = 64\nheight = 48\nchannels = 1\nframes = 12\nseed = 5\n"
      "background = noise\nlevel = 150\nnoise_sigma = 5\n"
      "illumination = step\ngain = 1.5\nstep_frame = 6\n"
      "object = 8x8 color=40 at=4,8 velocity=1,0 enter=2 exit=10\n";
  const SceneScript s = parse_scene_script(text);
  CHECK(s.width == 64);
  CHECK(s.channels == 1);
  CHECK(s.frame_count == 12);
  CHECK(s.seed == 5);
  CHECK(s.background == BackgroundKind::gaussian_noise);
  CHECK(s.illumination == IlluminationKind::step);
  CHECK(s.gain == 1.5);
  REQUIRE(s.objects.size() == 1);
  CHECK(s.objects[0].vx == 1.0);
  CHECK(s.objects[0].exit == 10);
  CHECK(s.objects[0].color == std::vector<float>{40.0F});

  CHECK_THROWS_AS(parse_scene_script("bogus = 1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_scene_script("width = abc\n"), InvalidInput);
  CHECK_THROWS_AS(parse_scene_script("object = 8x8 speed=3\n"), InvalidInput);
  CHECK_THROWS_AS(load_scene_script("/nonexistent/scene.script"), IoError);
}
