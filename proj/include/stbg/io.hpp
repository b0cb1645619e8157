#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stbg/features.hpp"
#include "stbg/pipeline.hpp"

namespace stbg {

// ---- PNM rasters ----------------------------------------------------------

/// Reads binary PGM (P5) or PPM (P6) with maxval <= 255.
Frame read_pnm(const std::string& path);

/// Writes P5 for one channel, P6 for three. Values are rounded and clamped.
void write_pnm(const std::string& path, const Frame& frame);

/// Frames from a directory of .pgm/.ppm files (sorted by name) or from a
/// manifest text file listing one path per line, relative to the manifest.
std::vector<std::string> list_frame_files(const std::string& path);
std::vector<Frame> load_frames(const std::string& path);

/// Writes mask_NNNNNN.pgm (NNNNNN = frame_index + 1), 255 = foreground.
void write_masks(const std::vector<MaskFrame>& masks, const std::string& out_dir);
std::string mask_file_name(int frame_index);

/// Any nonzero pixel is foreground.
MaskFrame read_mask(const std::string& path, int frame_index);

/// Masks keyed by the trailing number of each file name (number - 1 = index).
std::vector<MaskFrame> load_masks(const std::string& dir);

// ---- configuration ----------------------------------------------------------

Config parse_config(const std::string& text);
Config load_config(const std::string& path);
DescriptorMode parse_mode(const std::string& text);
std::string mode_name(DescriptorMode mode);

// ---- evaluation -------------------------------------------------------------

struct PrPoint {
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 1.0;
  double recall = 1.0;
  double f_score = 1.0;
  std::vector<PrPoint> pr_points;
};

struct Tally {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

/// F = 2 TP / (2 TP + FP + FN); 1 when all three are zero.
double f_score(std::size_t tp, std::size_t fp, std::size_t fn);
double precision(std::size_t tp, std::size_t fp);
double recall(std::size_t tp, std::size_t fn);

Tally tally(const MaskFrame& predicted, const MaskFrame& truth);
EvalReport report_from_tally(const Tally& t);

/// Pixel tallies over frames present in both lists (matched by frame index).
/// Predicted masks without a truth mask are skipped.
EvalReport evaluate(const std::vector<MaskFrame>& masks, const std::vector<MaskFrame>& truth);

/// Equal-length, index-aligned variant; throws InvalidInput on count or size
/// mismatch.
EvalReport evaluate_aligned(const std::vector<MaskFrame>& masks, const std::vector<MaskFrame>& truth);

enum class SweepTarget { t_omega, t_eps, t_rgb };
SweepTarget parse_sweep_target(const std::string& text);

/// Re-runs the segmentation once per threshold value and records the
/// (recall, precision) reached against `truth`.
std::vector<PrPoint> pr_sweep(std::span<const Frame> frames, const std::vector<MaskFrame>& truth,
                              const Config& base, SweepTarget target, std::span<const double> values);

std::string report_csv(const EvalReport& report);

}  // namespace stbg
