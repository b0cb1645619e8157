// Command-line front end: run, eval, synth, bench.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stbg/errors.hpp"
#include "stbg/io.hpp"
#include "stbg/keyvalue.hpp"
#include "stbg/pipeline.hpp"
#include "stbg/synth.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadArgs = 2;
constexpr int kExitIo = 3;

struct ConfigOptions {
  std::string config_path;
  std::string mode;
  int stride = 0;
  int threads = -1;
};

void add_config_options(CLI::App* cmd, ConfigOptions& opts) {
  cmd->add_option("--config", opts.config_path, "key = value parameter file");
  cmd->add_option("--mode", opts.mode, "descriptor: rgb or cs-stltp");
  cmd->add_option("--stride", opts.stride, "temporal step between bricks (1..depth)");
  cmd->add_option("--threads", opts.threads, "worker threads, 0 = all cores");
}

stbg::Config resolve_config(const ConfigOptions& opts) {
  stbg::Config cfg = opts.config_path.empty() ? stbg::Config{} : stbg::load_config(opts.config_path);
  if (!opts.mode.empty()) cfg.mode = stbg::parse_mode(opts.mode);
  if (opts.stride > 0) cfg.stride = opts.stride;
  if (opts.threads >= 0) cfg.threads = opts.threads;
  cfg.validate();
  return cfg;
}

std::string frame_file_name(int index, int channels) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06d.%s", index + 1, channels == 1 ? "pgm" : "ppm");
  return buf;
}

int run_command(const std::string& input, const std::string& output, const ConfigOptions& opts) {
  const stbg::Config cfg = resolve_config(opts);
  stbg::VideoSegmenter segmenter(cfg);
  std::size_t written = 0;
  for (const std::string& file : stbg::list_frame_files(input)) {
    const auto masks = segmenter.push(stbg::read_pnm(file));
    stbg::write_masks(masks, output);
    written += masks.size();
  }
  const auto tail = segmenter.finish();
  stbg::write_masks(tail, output);
  written += tail.size();
  std::cout << "wrote " << written << " masks to " << output << " (mode " << stbg::mode_name(cfg.mode) << ")\n";
  return kExitOk;
}

int eval_command(const std::string& masks_dir, const std::string& truth_dir, const std::string& sweep,
                 const std::string& sweep_param, const std::string& input, const ConfigOptions& opts,
                 const std::string& report_path) {
  const std::vector<stbg::MaskFrame> truth = stbg::load_masks(truth_dir);
  stbg::EvalReport report = stbg::evaluate(stbg::load_masks(masks_dir), truth);
  if (!sweep.empty()) {
    if (input.empty()) throw stbg::InvalidInput("--sweep needs --input to re-run the segmentation");
    const std::vector<double> values = stbg::to_doubles(sweep, "--sweep");
    const std::vector<stbg::Frame> frames = stbg::load_frames(input);
    report.pr_points = stbg::pr_sweep(frames, truth, resolve_config(opts),
                                      stbg::parse_sweep_target(sweep_param), values);
  }
  const std::string csv = stbg::report_csv(report);
  std::ofstream out(report_path);
  if (!out) throw stbg::IoError("cannot write " + report_path);
  out << csv;
  if (!out) throw stbg::IoError("cannot write " + report_path);
  std::cout << csv;
  return kExitOk;
}

int synth_command(const std::string& script_path, const std::string& output) {
  const stbg::SceneRenderer renderer(stbg::load_scene_script(script_path));
  const fs::path frames_dir = fs::path(output) / "frames";
  const fs::path truth_dir = fs::path(output) / "truth";
  std::error_code ec;
  fs::create_directories(frames_dir, ec);
  fs::create_directories(truth_dir, ec);
  if (ec) throw stbg::IoError("cannot create " + output);
  for (int i = 0; i < renderer.frame_count(); ++i) {
    const stbg::Frame f = renderer.frame(i);
    stbg::write_pnm((frames_dir / frame_file_name(i, f.channels)).string(), f);
    stbg::write_masks({renderer.truth(i)}, truth_dir.string());
  }
  std::cout << "rendered " << renderer.frame_count() << " frames to " << frames_dir.string()
            << " and truth masks to " << truth_dir.string() << "\n";
  return kExitOk;
}

int bench_command(const std::string& input, const ConfigOptions& opts) {
  const stbg::Config cfg = resolve_config(opts);
  const std::vector<stbg::Frame> frames = stbg::load_frames(input);
  stbg::VideoSegmenter segmenter(cfg);

  using Clock = std::chrono::steady_clock;
  double init_seconds = 0.0;
  double stream_seconds = 0.0;
  std::size_t streamed = 0;
  for (const stbg::Frame& f : frames) {
    const bool was_init = segmenter.initialized();
    const auto start = Clock::now();
    const auto masks = segmenter.push(f);
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    if (was_init) {
      stream_seconds += elapsed;
      streamed += masks.size();
    } else {
      init_seconds += elapsed;
    }
  }
  if (!segmenter.initialized()) segmenter.finish();
  if (!segmenter.initialized()) throw stbg::InsufficientData("bench: not enough frames to initialize");

  const stbg::StageTimings& t = segmenter.state().timings;
  const double fps = stream_seconds > 0.0 ? static_cast<double>(streamed) / stream_seconds : 0.0;
  const stbg::Frame& first = frames.front();
  std::cout << "resolution        " << first.width << "x" << first.height << "x" << first.channels << "\n"
            << "mode              " << stbg::mode_name(cfg.mode) << "\n"
            << "initialization    " << init_seconds << " s (" << cfg.init_frames << " frames)\n"
            << "streamed frames   " << streamed << "\n"
            << "throughput        " << fps << " frames/s\n"
            << "stage descriptor  " << t.descriptor << " s\n"
            << "stage segment     " << t.segmentation << " s\n"
            << "stage refine      " << t.refinement << " s\n"
            << "stage maintain    " << t.maintenance << " s\n"
            << "stage assemble    " << t.assembly << " s\n"
            << "soft target       10 frames/s at 352x288 rgb: " << (fps >= 10.0 ? "met" : "not met") << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal brick background subtraction"};
  app.require_subcommand(1);

  std::string input, output, masks_dir, truth_dir, sweep, sweep_param = "t_omega", report, script;
  ConfigOptions run_opts, eval_opts, bench_opts;

  auto* run = app.add_subcommand("run", "segment a frame sequence and write masks");
  run->add_option("--input", input, "directory of PGM/PPM frames or a manifest")->required();
  run->add_option("--output", output, "mask output directory")->required();
  add_config_options(run, run_opts);

  auto* eval = app.add_subcommand("eval", "score masks against ground truth");
  eval->add_option("--masks", masks_dir, "predicted mask directory")->required();
  eval->add_option("--truth", truth_dir, "ground-truth mask directory")->required();
  eval->add_option("--sweep", sweep, "comma-separated thresholds for a PR sweep");
  eval->add_option("--sweep-param", sweep_param, "t_omega, t_eps or t_rgb");
  eval->add_option("--input", input, "frames to re-run for the sweep");
  eval->add_option("--report", report, "CSV report path")->required();
  add_config_options(eval, eval_opts);

  auto* synth = app.add_subcommand("synth", "render a synthetic scene with ground truth");
  synth->add_option("--script", script, "scene script")->required();
  synth->add_option("--output", output, "output directory")->required();

  auto* bench = app.add_subcommand("bench", "measure throughput and per-stage time");
  bench->add_option("--input", input, "directory of PGM/PPM frames or a manifest")->required();
  add_config_options(bench, bench_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadArgs;
  }

  try {
    if (*run) return run_command(input, output, run_opts);
    if (*eval) return eval_command(masks_dir, truth_dir, sweep, sweep_param, input, eval_opts, report);
    if (*synth) return synth_command(script, output);
    if (*bench) return bench_command(input, bench_opts);
  } catch (const stbg::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArgs;
  } catch (const stbg::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const stbg::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const stbg::InsufficientData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitBadArgs;
}
