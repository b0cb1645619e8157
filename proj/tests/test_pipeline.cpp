#include <doctest.h>

#include <random>

#include "stbg/errors.hpp"
#include "stbg/io.hpp"
#include "stbg/pipeline.hpp"
#include "stbg/synth.hpp"

using namespace stbg;

namespace {

MaskFrame blob_mask(int pixels) {
  // A horizontal run of `pixels` pixels, wrapped onto a second row.
  MaskFrame m(0, 32, 8);
  for (int i = 0; i < pixels; ++i) m.at(2 + i % 16, 2 + i / 16) = 1;
  return m;
}

SceneScript noise_scene(int channels, int frames) {
  SceneScript s;
  s.width = 64;
  s.height = 48;
  s.channels = channels;
  s.frame_count = frames;
  s.seed = 7;
  s.level.assign(static_cast<std::size_t>(channels), 150.0F);
  s.noise_sigma = 5.0;
  return s;
}

Config small_config(DescriptorMode mode) {
  Config cfg;
  cfg.mode = mode;
  cfg.threads = 2;
  return cfg;
}

}  // namespace

TEST_CASE("postprocess removes components below the minimum area") {
  CHECK(postprocess(blob_mask(19), 20).foreground_count() == 0);
  CHECK(postprocess(blob_mask(20), 20).foreground_count() == 20);
  CHECK(postprocess(blob_mask(19), 0).foreground_count() == 19);
  CHECK_THROWS_AS(postprocess(blob_mask(3), -1), InvalidInput);
}

TEST_CASE("postprocess joins diagonal neighbours") {
  MaskFrame m(0, 30, 30);
  for (int i = 0; i < 20; ++i) m.at(i, i) = 1;  // diagonal line, 8-connected only
  CHECK(postprocess(m, 20).foreground_count() == 20);
  m.at(5, 5) = 0;  // splits it into 5 + 14
  CHECK(postprocess(m, 20).foreground_count() == 0);
}

TEST_CASE("postprocess keeps large components and drops small ones independently") {
  MaskFrame m(0, 40, 20);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) m.at(x, y) = 1;  // 25 px
  for (int x = 20; x < 30; ++x) m.at(x, 10) = 1;  // 10 px
  const MaskFrame out = postprocess(m, 20);
  CHECK(out.foreground_count() == 25);
  CHECK(out.at(4, 4) == 1);
  CHECK(out.at(25, 10) == 0);
  CHECK(out.frame_index == m.frame_index);
}

TEST_CASE("config defaults and validation") {
  Config cfg;
  CHECK(cfg.eps_threshold() == 3.0);
  CHECK(cfg.omega_threshold() == 3.0);
  cfg.mode = DescriptorMode::rgb;
  CHECK(cfg.eps_threshold() == 4.0);
  CHECK(cfg.omega_threshold() == 5.0);
  cfg.t_omega = 7.5;
  CHECK(cfg.thresholds().t_omega == 7.5);
  CHECK(cfg.temporal_stride() == 5);
  CHECK(cfg.descriptor_full_scale() == 255.0);
  cfg.mode = DescriptorMode::cs_stltp;
  CHECK(cfg.descriptor_full_scale() == 320.0);
  CHECK_NOTHROW(cfg.validate());

  for (auto breaker : std::vector<void (*)(Config&)>{
           [](Config& c) { c.tau = 0.0; }, [](Config& c) { c.alpha = 1.0; },
           [](Config& c) { c.beta = -1.0; }, [](Config& c) { c.span = 1; },
           [](Config& c) { c.brick.width = 0; }, [](Config& c) { c.t_eps = 0.0; },
           [](Config& c) { c.min_area = -1; }, [](Config& c) { c.stride = 6; }}) {
    Config bad;
    breaker(bad);
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
  }
}

TEST_CASE("refine_pixels compares against the background mean") {
  std::vector<Frame> frames(5, Frame(4, 4, 3, 100.0F));
  frames[2].at(1, 3, 2) = 110.0F;
  frames[4].at(0, 0, 0) = 104.0F;
  const std::vector<float> mean(4 * 4 * 3, 100.0F);
  const auto mask = refine_pixels(VideoBrick{FrameVolume(frames), 0, 0, 0, {}}, mean, 5.0);
  REQUIRE(mask.size() == 80);
  CHECK(std::count(mask.begin(), mask.end(), true) == 1);
  CHECK(mask[(2 * 4 + 3) * 4 + 1]);
  CHECK_THROWS_AS(refine_pixels(VideoBrick{FrameVolume(frames), 0, 0, 0, {}}, std::vector<float>(3), 5.0),
                  InvalidInput);
}

TEST_CASE("initialize builds one model per grid cell") {
  SceneScript s = noise_scene(1, 50);
  s.width = 30;  // not a multiple of the brick width
  s.height = 18;
  const RenderedScene scene = render(s);
  const SceneState st = initialize(scene.frames, small_config(DescriptorMode::rgb));
  CHECK(st.grid_cols == 8);
  CHECK(st.grid_rows == 5);
  CHECK(st.grid.size() == 40);
  CHECK(st.cell(7, 4).x0 == 26);
  CHECK(st.cell(7, 4).y0 == 14);
  CHECK(st.next_frame == 50);
  for (const GridCell& c : st.grid) {
    CHECK(c.model.descriptor_length() == 80);
    CHECK(c.model.noise_dim() <= c.model.dim());
    CHECK(c.model.states.size() == 10);
  }
  CHECK(st.aux_bg_mean.size() == 30u * 18u);

  const std::span<const Frame> few(scene.frames.data(), 9);
  CHECK_THROWS_AS(initialize(few, small_config(DescriptorMode::rgb)), InsufficientData);
}

TEST_CASE("step requires a full batch of matching frames") {
  const RenderedScene scene = render(noise_scene(1, 60));
  SceneState st = initialize(std::span(scene.frames).first(50), small_config(DescriptorMode::rgb));
  CHECK_THROWS_AS(step(st, std::span(scene.frames).subspan(50, 4)), InvalidInput);
  std::vector<Frame> wrong(5, Frame(10, 10, 1));
  CHECK_THROWS_AS(step(st, wrong), InvalidInput);
  const auto masks = step(st, std::span(scene.frames).subspan(50, 5));
  REQUIRE(masks.size() == 5);
  CHECK(masks.front().frame_index == 50);
  CHECK(masks.back().frame_index == 54);
  CHECK(st.next_frame == 55);
}

TEST_CASE("segmenter emits one mask per frame in order") {
  const RenderedScene scene = render(noise_scene(1, 63));
  VideoSegmenter seg(small_config(DescriptorMode::cs_stltp));
  std::vector<MaskFrame> masks;
  for (const Frame& f : scene.frames) {
    auto out = seg.push(f);
    masks.insert(masks.end(), out.begin(), out.end());
  }
  auto tail = seg.finish();
  masks.insert(masks.end(), tail.begin(), tail.end());
  REQUIRE(masks.size() == 63);
  for (int i = 0; i < 63; ++i) CHECK(masks[static_cast<std::size_t>(i)].frame_index == i);
  for (int i = 0; i < 50; ++i) CHECK(masks[static_cast<std::size_t>(i)].foreground_count() == 0);
}

TEST_CASE("segmentation is deterministic across thread counts") {
  SceneScript s = noise_scene(3, 70);
  s.objects.push_back(MovingObject{12, 12, {40, 50, 70}, 4, 20, 1.0, 0.0, 50, -1});
  const RenderedScene scene = render(s);
  for (DescriptorMode mode : {DescriptorMode::rgb, DescriptorMode::cs_stltp}) {
    Config one = small_config(mode);
    one.threads = 1;
    Config four = small_config(mode);
    four.threads = 4;
    const auto a = segment_video(scene.frames, one);
    const auto b = segment_video(scene.frames, four);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].labels == b[i].labels);
  }
}

TEST_CASE("stationary noise stays background") {
  for (DescriptorMode mode : {DescriptorMode::rgb, DescriptorMode::cs_stltp}) {
    const RenderedScene scene = render(noise_scene(1, 150));
    const auto masks = segment_video(scene.frames, small_config(mode));
    std::size_t fg = 0;
    std::size_t total = 0;
    for (std::size_t i = 50; i < masks.size(); ++i) {
      fg += masks[i].foreground_count();
      total += masks[i].labels.size();
    }
    INFO("mode " << mode_name(mode) << " foreground rate " << static_cast<double>(fg) / total);
    CHECK(static_cast<double>(fg) / static_cast<double>(total) < 0.01);
  }
}

TEST_CASE("a moving square is found") {
  SceneScript s = noise_scene(3, 120);
  s.width = 96;
  s.height = 72;
  s.objects.push_back(MovingObject{24, 24, {40, 50, 70}, 8, 24, 0.5, 0.0, 50, -1});
  const RenderedScene scene = render(s);
  const auto masks = segment_video(scene.frames, small_config(DescriptorMode::rgb));
  double f_sum = 0.0;
  int counted = 0;
  for (std::size_t i = 50; i < masks.size(); ++i) {
    const Tally t = tally(masks[i], scene.truth[i]);
    f_sum += f_score(t.tp, t.fp, t.fn);
    ++counted;
  }
  const double mean_f = f_sum / counted;
  INFO("mean F " << mean_f);
  CHECK(mean_f > 0.8);
}
