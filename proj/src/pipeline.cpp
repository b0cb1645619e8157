#include "stbg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <iterator>
#include <cmath>
#include <string>
#include <thread>

#include "stbg/errors.hpp"
#include "stbg/maintenance.hpp"

namespace stbg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int worker_count(int requested, std::size_t jobs) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(jobs, 1)));
}

// Runs body(worker, begin, end) over contiguous chunks of [0, jobs).
template <typename Body>
void parallel_chunks(std::size_t jobs, int workers, Body&& body) {
  if (workers <= 1) {
    body(0, std::size_t{0}, jobs);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const std::size_t chunk = (jobs + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(jobs, chunk * w);
    const std::size_t end = std::min(jobs, begin + chunk);
    pool.emplace_back([&body, w, begin, end] { body(w, begin, end); });
  }
}

void check_frames(std::span<const Frame> frames, const char* what) {
  for (const Frame& f : frames) {
    if (!f.same_shape(frames.front())) {
      throw InvalidInput(std::string(what) + ": frames differ in size or channel count");
    }
  }
}

}  // namespace

double Config::eps_threshold() const {
  if (t_eps) return *t_eps;
  return mode == DescriptorMode::rgb ? 4.0 : 3.0;
}

double Config::omega_threshold() const {
  if (t_omega) return *t_omega;
  return mode == DescriptorMode::rgb ? 5.0 : 3.0;
}

double Config::descriptor_full_scale() const {
  return mode == DescriptorMode::rgb ? 255.0 : static_cast<double>(brick.voxels() * kPlanes);
}

SubspaceParams Config::subspace_params() const {
  return {t_d, t_deps, span, scaled_dim_threshold ? descriptor_full_scale() : 1.0};
}

void Config::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw InvalidInput(std::string("config: ") + msg);
  };
  require(brick.width >= 1 && brick.height >= 1 && brick.depth >= 1, "brick dimensions must be positive");
  require(stride >= 0 && temporal_stride() <= brick.depth, "stride must lie in [1, brick depth]");
  require(tau > 0.0, "tau must be positive");
  require(t_d >= 0.0 && t_deps >= 0.0, "dimension thresholds must be non-negative");
  require(eps_threshold() > 0.0 && omega_threshold() > 0.0, "residual thresholds must be positive");
  require(t_rgb > 0.0, "t_rgb must be positive");
  require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
  require(beta > 0.0, "beta must be positive");
  require(span >= 2, "span must be at least 2");
  require(init_frames >= 1, "init_frames must be positive");
  require(min_area >= 0, "min_area must be non-negative");
}

std::size_t MaskFrame::foreground_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

SceneState initialize(std::span<const Frame> frames, const Config& config) {
  config.validate();
  if (frames.empty()) throw InsufficientData("initialize: no frames");
  check_frames(frames, "initialize");

  const BrickGeometry& g = config.brick;
  const int stride = config.temporal_stride();
  const int n_frames = static_cast<int>(frames.size());
  const int n_bricks = n_frames >= g.depth ? (n_frames - g.depth) / stride + 1 : 0;
  if (n_bricks < 2) {
    throw InsufficientData("initialize: " + std::to_string(n_frames) +
                           " frames give fewer than 2 training bricks of depth " +
                           std::to_string(g.depth));
  }

  SceneState state;
  state.config = config;
  state.width = frames.front().width;
  state.height = frames.front().height;
  state.channels = frames.front().channels;
  if (state.width < g.width || state.height < g.height) {
    throw InvalidInput("initialize: frame is smaller than one brick");
  }
  state.grid_cols = (state.width + g.width - 1) / g.width;
  state.grid_rows = (state.height + g.height - 1) / g.height;
  state.grid.resize(static_cast<std::size_t>(state.grid_cols) * state.grid_rows);

  const FrameVolume volume(frames);
  const SubspaceParams params = config.subspace_params();
  const int workers = worker_count(config.threads, state.grid.size());
  parallel_chunks(state.grid.size(), workers, [&](int, std::size_t begin, std::size_t end) {
    std::vector<Vector> bricks(static_cast<std::size_t>(n_bricks));
    for (std::size_t i = begin; i < end; ++i) {
      GridCell& cell = state.grid[i];
      cell.grid_x = static_cast<int>(i % state.grid_cols);
      cell.grid_y = static_cast<int>(i / state.grid_cols);
      cell.x0 = std::min(cell.grid_x * g.width, state.width - g.width);
      cell.y0 = std::min(cell.grid_y * g.height, state.height - g.height);
      for (int b = 0; b < n_bricks; ++b) {
        const VideoBrick brick{volume, cell.x0, cell.y0, b * stride, g};
        bricks[static_cast<std::size_t>(b)] = brick_descriptor(brick, config.mode, config.tau).values;
      }
      cell.model = learn_initial(bricks, params);
    }
  });

  state.aux_bg_mean.assign(frames.front().pixels.size(), 0.0F);
  std::vector<double> sum(frames.front().pixels.size(), 0.0);
  for (const Frame& f : frames) {
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += f.pixels[k];
  }
  for (std::size_t k = 0; k < sum.size(); ++k) {
    state.aux_bg_mean[k] = static_cast<float>(sum[k] / n_frames);
  }

  const int keep = std::min(n_frames, g.depth);
  state.history.assign(frames.end() - keep, frames.end());
  state.next_frame = n_frames;
  return state;
}

std::vector<bool> refine_pixels(const VideoBrick& brick, std::span<const float> aux_bg_mean,
                                double t_rgb) {
  const FrameVolume& vol = brick.volume;
  const BrickGeometry& g = brick.dims;
  const int channels = vol.channels();
  if (aux_bg_mean.size() != static_cast<std::size_t>(vol.width()) * vol.height() * channels) {
    throw InvalidInput("refine_pixels: background mean does not match frame size");
  }
  std::vector<bool> mask(static_cast<std::size_t>(g.voxels()), false);
  std::size_t i = 0;
  for (int dt = 0; dt < g.depth; ++dt)
    for (int dy = 0; dy < g.height; ++dy)
      for (int dx = 0; dx < g.width; ++dx, ++i) {
        const int x = brick.x0 + dx;
        const int y = brick.y0 + dy;
        const std::size_t base = (static_cast<std::size_t>(y) * vol.width() + x) * channels;
        double deviation = 0.0;
        for (int c = 0; c < channels; ++c) {
          deviation = std::max(deviation,
                               std::abs(static_cast<double>(vol.at(x, y, brick.t0 + dt, c)) -
                                        aux_bg_mean[base + c]));
        }
        mask[i] = deviation > t_rgb;
      }
  return mask;
}

std::vector<MaskFrame> step(SceneState& state, std::span<const Frame> frames) {
  const Config& cfg = state.config;
  const BrickGeometry& g = cfg.brick;
  const int stride = cfg.temporal_stride();
  if (static_cast<int>(frames.size()) != stride) {
    throw InvalidInput("step: expected " + std::to_string(stride) + " frames, got " +
                       std::to_string(frames.size()));
  }
  for (const Frame& f : frames) {
    if (f.width != state.width || f.height != state.height || f.channels != state.channels) {
      throw InvalidInput("step: frame size does not match the initialized scene");
    }
  }

  std::vector<Frame> window = state.history;
  window.insert(window.end(), frames.begin(), frames.end());
  const FrameVolume volume(window);
  const int t0 = volume.depth() - g.depth;
  const int first_new = g.depth - stride;  // brick slice of the first new frame
  const SegmentThresholds thresholds = cfg.thresholds();
  const int channels = state.channels;

  const std::size_t cells = state.grid.size();
  std::vector<Vector> descriptors(cells);
  std::vector<BrickLabel> labels(cells);
  const int workers = worker_count(cfg.threads, cells);
  std::vector<StageTimings> local(static_cast<std::size_t>(workers));

  parallel_chunks(cells, workers, [&](int w, std::size_t begin, std::size_t end) {
    StageTimings& tm = local[static_cast<std::size_t>(w)];
    for (std::size_t i = begin; i < end; ++i) {
      const GridCell& cell = state.grid[i];
      const VideoBrick brick{volume, cell.x0, cell.y0, t0, g};

      auto clock = Clock::now();
      descriptors[i] = brick_descriptor(brick, cfg.mode, cfg.tau).values;
      tm.descriptor += seconds_since(clock);

      clock = Clock::now();
      const ResidualPair residuals = compute_residuals(cell.model, descriptors[i]);
      labels[i] = classify(residuals, thresholds, cfg.mode, g, channels);
      tm.segmentation += seconds_since(clock);

      clock = Clock::now();
      if (cfg.mode == DescriptorMode::cs_stltp && !labels[i].is_background) {
        labels[i].voxel_mask = refine_pixels(brick, state.aux_bg_mean, cfg.t_rgb);
      }
      tm.refinement += seconds_since(clock);
    }
  });

  auto clock = Clock::now();
  std::vector<MaskFrame> out;
  out.reserve(frames.size());
  for (int k = 0; k < stride; ++k) {
    MaskFrame mask(state.next_frame + k, state.width, state.height);
    const int dt = first_new + k;
    for (int y = 0; y < state.height; ++y) {
      const int gy = y / g.height;
      for (int x = 0; x < state.width; ++x) {
        const GridCell& cell = state.cell(x / g.width, gy);
        const std::vector<bool>& vm = labels[static_cast<std::size_t>(gy) * state.grid_cols + x / g.width].voxel_mask;
        const std::size_t voxel = (static_cast<std::size_t>(dt) * g.height + (y - cell.y0)) * g.width + (x - cell.x0);
        mask.at(x, y) = vm[voxel] ? 1 : 0;
      }
    }
    out.push_back(postprocess(mask, cfg.min_area));
  }

  // Running background mean follows pixels labeled background.
  const auto rate = static_cast<float>(cfg.alpha);
  for (int k = 0; k < stride; ++k) {
    const Frame& f = frames[static_cast<std::size_t>(k)];
    const MaskFrame& m = out[static_cast<std::size_t>(k)];
    for (std::size_t p = 0; p < m.labels.size(); ++p) {
      if (m.labels[p]) continue;
      for (int c = 0; c < channels; ++c) {
        float& mean = state.aux_bg_mean[p * channels + c];
        mean += rate * (f.pixels[p * channels + c] - mean);
      }
    }
  }

  // A cs brick whose pixels were all discarded counts as background from here on.
  if (cfg.mode == DescriptorMode::cs_stltp) {
    std::vector<bool> kept(cells, false);
    for (const MaskFrame& m : out)
      for (int y = 0; y < state.height; ++y)
        for (int x = 0; x < state.width; ++x)
          if (m.at(x, y)) kept[static_cast<std::size_t>(y / g.height) * state.grid_cols + x / g.width] = true;
    for (std::size_t i = 0; i < cells; ++i)
      if (!kept[i]) labels[i].is_background = true;
  }
  const double assembly = seconds_since(clock);

  parallel_chunks(cells, workers, [&](int w, std::size_t begin, std::size_t end) {
    StageTimings& tm = local[static_cast<std::size_t>(w)];
    for (std::size_t i = begin; i < end; ++i) {
      SubspaceModel& model = state.grid[i].model;
      const BrickLabel& label = labels[i];
      const auto start = Clock::now();
      const Vector v_hat = synthesize(model);
      const Vector v_bar = compose(descriptors[i], label, v_hat, cfg.mode, channels);
      const Reweighted rw = robust_reweight(model, v_bar, cfg.beta);
      update_appearance(model, rw.v_tilde, cfg.alpha);
      const bool replaced =
          cfg.mode == DescriptorMode::cs_stltp
              ? !label.is_background
              : std::find(label.voxel_mask.begin(), label.voxel_mask.end(), true) != label.voxel_mask.end();
      update_dynamics(model, model.c.transpose() * rw.v_tilde, cfg.t_deps, !replaced);
      tm.maintenance += seconds_since(start);
    }
  });

  const int keep = std::min<int>(static_cast<int>(window.size()), g.depth);
  state.history.assign(window.end() - keep, window.end());
  state.next_frame += stride;

  StageTimings& total = state.timings;
  for (const StageTimings& tm : local) {
    total.descriptor += tm.descriptor;
    total.segmentation += tm.segmentation;
    total.refinement += tm.refinement;
    total.maintenance += tm.maintenance;
  }
  total.assembly += assembly;
  total.frames += static_cast<std::size_t>(stride);
  return out;
}

MaskFrame postprocess(const MaskFrame& mask, int min_area) {
  if (min_area < 0) throw InvalidInput("postprocess: min_area must be non-negative");
  MaskFrame out = mask;
  if (min_area <= 1) return out;

  const int w = mask.width;
  const int h = mask.height;
  std::vector<std::uint8_t> visited(mask.labels.size(), 0);
  std::vector<int> stack;
  std::vector<int> component;
  for (int start = 0; start < w * h; ++start) {
    if (!mask.labels[static_cast<std::size_t>(start)] || visited[static_cast<std::size_t>(start)]) continue;
    component.clear();
    stack.push_back(start);
    visited[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      component.push_back(p);
      const int px = p % w;
      const int py = p / w;
      for (int ny = std::max(py - 1, 0); ny <= std::min(py + 1, h - 1); ++ny) {
        for (int nx = std::max(px - 1, 0); nx <= std::min(px + 1, w - 1); ++nx) {
          const int q = ny * w + nx;
          if (mask.labels[static_cast<std::size_t>(q)] && !visited[static_cast<std::size_t>(q)]) {
            visited[static_cast<std::size_t>(q)] = 1;
            stack.push_back(q);
          }
        }
      }
    }
    if (static_cast<int>(component.size()) < min_area) {
      for (int p : component) out.labels[static_cast<std::size_t>(p)] = 0;
    }
  }
  return out;
}

}  // namespace stbg

namespace stbg {

VideoSegmenter::VideoSegmenter(Config config) : config_(std::move(config)) { config_.validate(); }

std::vector<MaskFrame> VideoSegmenter::start(std::vector<Frame> init) {
  state_ = initialize(init, config_);
  std::vector<MaskFrame> out;
  for (int i = 0; i < static_cast<int>(init.size()); ++i) {
    out.emplace_back(i, init.front().width, init.front().height);
  }
  return out;
}

std::vector<MaskFrame> VideoSegmenter::push(Frame frame) {
  if (!pending_.empty() && !frame.same_shape(pending_.front())) {
    throw InvalidInput("VideoSegmenter: frame size does not match earlier frames");
  }
  pending_.push_back(std::move(frame));
  if (!state_) {
    if (static_cast<int>(pending_.size()) < config_.init_frames) return {};
    std::vector<Frame> init = std::move(pending_);
    pending_.clear();
    return start(std::move(init));
  }
  if (static_cast<int>(pending_.size()) < config_.temporal_stride()) return {};
  std::vector<Frame> batch = std::move(pending_);
  pending_.clear();
  return step(*state_, batch);
}

std::vector<MaskFrame> VideoSegmenter::finish() {
  std::vector<MaskFrame> out;
  if (!state_) {
    if (pending_.empty()) return out;
    std::vector<Frame> init = std::move(pending_);
    pending_.clear();
    return start(std::move(init));
  }
  if (pending_.empty()) return out;
  const std::size_t real = pending_.size();
  std::vector<Frame> batch = std::move(pending_);
  pending_.clear();
  while (static_cast<int>(batch.size()) < config_.temporal_stride()) batch.push_back(batch.back());
  out = step(*state_, batch);
  out.resize(real);
  state_->next_frame -= static_cast<int>(batch.size() - real);
  return out;
}

std::vector<MaskFrame> segment_video(std::span<const Frame> frames, const Config& config) {
  VideoSegmenter seg(config);
  std::vector<MaskFrame> out;
  for (const Frame& f : frames) {
    auto masks = seg.push(f);
    std::move(masks.begin(), masks.end(), std::back_inserter(out));
  }
  auto tail = seg.finish();
  std::move(tail.begin(), tail.end(), std::back_inserter(out));
  return out;
}

}  // namespace stbg
