#include "stbg/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "stbg/errors.hpp"
#include "stbg/keyvalue.hpp"

namespace fs = std::filesystem;

namespace stbg {

namespace {

// Reads the next header token, skipping whitespace and # comments.
std::string next_token(std::istream& in, const std::string& path) {
  std::string token;
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  if (token.empty()) throw FormatError(path + ": truncated header");
  return token;
}

int header_int(std::istream& in, const std::string& path, const char* what) {
  const std::string tok = next_token(in, path);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw FormatError(path + ": bad " + what + " '" + tok + "'");
}

bool is_frame_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

// Trailing decimal number of the file stem, if any.
std::optional<long long> trailing_number(const fs::path& p) {
  const std::string stem = p.stem().string();
  std::size_t end = stem.size();
  std::size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  if (begin == end) return std::nullopt;
  return std::stoll(stem.substr(begin));
}

}  // namespace

Frame read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string magic = next_token(in, path);
  int channels = 0;
  if (magic == "P5") channels = 1;
  else if (magic == "P6") channels = 3;
  else throw FormatError(path + ": unsupported magic '" + magic + "' (need P5 or P6)");
  const int width = header_int(in, path, "width");
  const int height = header_int(in, path, "height");
  const int maxval = header_int(in, path, "maxval");
  if (maxval > 255) throw FormatError(path + ": maxval " + std::to_string(maxval) + " exceeds 255");

  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw FormatError(path + ": truncated pixel data");
  }
  Frame f(width, height, channels);
  const double scale = 255.0 / maxval;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    f.pixels[k] = maxval == 255 ? static_cast<float>(raw[k]) : static_cast<float>(std::round(raw[k] * scale));
  }
  return f;
}

void write_pnm(const std::string& path, const Frame& frame) {
  if (frame.channels != 1 && frame.channels != 3) {
    throw InvalidInput("write_pnm: only 1 or 3 channels are supported");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << (frame.channels == 1 ? "P5" : "P6") << '\n' << frame.width << ' ' << frame.height << "\n255\n";
  std::vector<unsigned char> raw(frame.pixels.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    raw[k] = static_cast<unsigned char>(std::clamp(std::lround(frame.pixels[k]), 0L, 255L));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("cannot write " + path);
}

std::vector<std::string> list_frame_files(const std::string& path) {
  std::error_code ec;
  std::vector<std::string> files;
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path, ec)) {
      if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path().string());
    }
    if (ec) throw IoError("cannot list " + path);
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path, ec)) {
    const fs::path base = fs::path(path).parent_path();
    std::istringstream lines(read_text_file(path));
    std::string line;
    while (std::getline(lines, line)) {
      const std::string entry = trim(line);
      if (entry.empty() || entry.front() == '#') continue;
      const fs::path p(entry);
      files.push_back((p.is_absolute() ? p : base / p).string());
    }
  } else {
    throw IoError("no such directory or manifest: " + path);
  }
  if (files.empty()) throw IoError("no frames found in " + path);
  return files;
}

std::vector<Frame> load_frames(const std::string& path) {
  std::vector<Frame> frames;
  for (const std::string& file : list_frame_files(path)) {
    frames.push_back(read_pnm(file));
    if (!frames.back().same_shape(frames.front())) {
      throw FormatError(file + ": size or channel count differs from " + list_frame_files(path).front());
    }
  }
  return frames;
}

std::string mask_file_name(int frame_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "mask_%06d.pgm", frame_index + 1);
  return buf;
}

void write_masks(const std::vector<MaskFrame>& masks, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir);
  for (const MaskFrame& m : masks) {
    Frame raster(m.width, m.height, 1);
    for (std::size_t k = 0; k < m.labels.size(); ++k) raster.pixels[k] = m.labels[k] ? 255.0F : 0.0F;
    write_pnm((fs::path(out_dir) / mask_file_name(m.frame_index)).string(), raster);
  }
}

MaskFrame read_mask(const std::string& path, int frame_index) {
  const Frame raster = read_pnm(path);
  MaskFrame m(frame_index, raster.width, raster.height);
  for (int y = 0; y < raster.height; ++y)
    for (int x = 0; x < raster.width; ++x) {
      bool on = false;
      for (int c = 0; c < raster.channels; ++c) on = on || raster.at(x, y, c) != 0.0F;
      m.at(x, y) = on ? 1 : 0;
    }
  return m;
}

std::vector<MaskFrame> load_masks(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("no such directory: " + dir);
  std::map<long long, std::string> by_number;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (!entry.is_regular_file() || !is_frame_file(entry.path())) continue;
    const auto number = trailing_number(entry.path());
    if (!number) continue;
    if (!by_number.emplace(*number, entry.path().string()).second) {
      throw FormatError(dir + ": two mask files share frame number " + std::to_string(*number));
    }
  }
  std::vector<MaskFrame> masks;
  for (const auto& [number, file] : by_number) {
    masks.push_back(read_mask(file, static_cast<int>(number - 1)));
  }
  return masks;
}

DescriptorMode parse_mode(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), '-', '_');
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (t == "cs_stltp") return DescriptorMode::cs_stltp;
  if (t == "rgb") return DescriptorMode::rgb;
  throw InvalidInput("mode: expected rgb or cs-stltp, got '" + text + "'");
}

std::string mode_name(DescriptorMode mode) {
  return mode == DescriptorMode::rgb ? "rgb" : "cs-stltp";
}

Config parse_config(const std::string& text) {
  Config cfg;
  for (const KeyValue& kv : parse_key_values(text)) {
    const std::string& k = kv.key;
    const std::string& v = kv.value;
    if (k == "mode") cfg.mode = parse_mode(v);
    else if (k == "brick") {
      const auto parts = split(v, 'x');
      if (parts.size() != 3) throw InvalidInput("brick: expected WxHxT, got '" + v + "'");
      cfg.brick = {static_cast<int>(to_integer(parts[0], k)), static_cast<int>(to_integer(parts[1], k)),
                   static_cast<int>(to_integer(parts[2], k))};
    }
    else if (k == "stride") cfg.stride = static_cast<int>(to_integer(v, k));
    else if (k == "tau") cfg.tau = to_double(v, k);
    else if (k == "t_d") cfg.t_d = to_double(v, k);
    else if (k == "t_deps") cfg.t_deps = to_double(v, k);
    else if (k == "t_eps") cfg.t_eps = to_double(v, k);
    else if (k == "t_omega") cfg.t_omega = to_double(v, k);
    else if (k == "t_rgb") cfg.t_rgb = to_double(v, k);
    else if (k == "alpha") cfg.alpha = to_double(v, k);
    else if (k == "beta") cfg.beta = to_double(v, k);
    else if (k == "l" || k == "span") cfg.span = static_cast<std::size_t>(to_integer(v, k));
    else if (k == "init_frames") cfg.init_frames = static_cast<int>(to_integer(v, k));
    else if (k == "min_area") cfg.min_area = static_cast<int>(to_integer(v, k));
    else if (k == "scaled_dim_threshold") {
      if (v == "true" || v == "1") cfg.scaled_dim_threshold = true;
      else if (v == "false" || v == "0") cfg.scaled_dim_threshold = false;
      else throw InvalidInput("scaled_dim_threshold: expected true or false, got '" + v + "'");
    }
    else if (k == "threads") cfg.threads = static_cast<int>(to_integer(v, k));
    else throw InvalidInput("line " + std::to_string(kv.line) + ": unknown config key '" + k + "'");
  }
  cfg.validate();
  return cfg;
}

Config load_config(const std::string& path) { return parse_config(read_text_file(path)); }

double f_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 1.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

double precision(std::size_t tp, std::size_t fp) {
  return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall(std::size_t tp, std::size_t fn) {
  return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

Tally tally(const MaskFrame& predicted, const MaskFrame& truth) {
  if (predicted.width != truth.width || predicted.height != truth.height) {
    throw InvalidInput("evaluate: mask " + std::to_string(predicted.frame_index) +
                       " differs in size from its ground truth");
  }
  Tally t;
  for (std::size_t k = 0; k < predicted.labels.size(); ++k) {
    const bool p = predicted.labels[k] != 0;
    const bool g = truth.labels[k] != 0;
    t.tp += static_cast<std::size_t>(p && g);
    t.fp += static_cast<std::size_t>(p && !g);
    t.fn += static_cast<std::size_t>(!p && g);
  }
  return t;
}

EvalReport report_from_tally(const Tally& t) {
  EvalReport r;
  r.tp = t.tp;
  r.fp = t.fp;
  r.fn = t.fn;
  r.precision = precision(t.tp, t.fp);
  r.recall = recall(t.tp, t.fn);
  r.f_score = f_score(t.tp, t.fp, t.fn);
  return r;
}

EvalReport evaluate(const std::vector<MaskFrame>& masks, const std::vector<MaskFrame>& truth) {
  std::map<int, const MaskFrame*> truth_by_index;
  for (const MaskFrame& g : truth) truth_by_index[g.frame_index] = &g;
  Tally total;
  for (const MaskFrame& m : masks) {
    const auto it = truth_by_index.find(m.frame_index);
    if (it == truth_by_index.end()) continue;
    const Tally t = tally(m, *it->second);
    total.tp += t.tp;
    total.fp += t.fp;
    total.fn += t.fn;
  }
  return report_from_tally(total);
}

EvalReport evaluate_aligned(const std::vector<MaskFrame>& masks, const std::vector<MaskFrame>& truth) {
  if (masks.size() != truth.size()) {
    throw InvalidInput("evaluate: " + std::to_string(masks.size()) + " masks but " +
                       std::to_string(truth.size()) + " ground-truth frames");
  }
  Tally total;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const Tally t = tally(masks[i], truth[i]);
    total.tp += t.tp;
    total.fp += t.fp;
    total.fn += t.fn;
  }
  return report_from_tally(total);
}

SweepTarget parse_sweep_target(const std::string& text) {
  if (text == "t_omega") return SweepTarget::t_omega;
  if (text == "t_eps") return SweepTarget::t_eps;
  if (text == "t_rgb") return SweepTarget::t_rgb;
  throw InvalidInput("sweep target: expected t_omega, t_eps or t_rgb, got '" + text + "'");
}

std::vector<PrPoint> pr_sweep(std::span<const Frame> frames, const std::vector<MaskFrame>& truth,
                              const Config& base, SweepTarget target, std::span<const double> values) {
  std::vector<PrPoint> points;
  for (double value : values) {
    Config cfg = base;
    switch (target) {
      case SweepTarget::t_omega: cfg.t_omega = value; break;
      case SweepTarget::t_eps: cfg.t_eps = value; break;
      case SweepTarget::t_rgb: cfg.t_rgb = value; break;
    }
    const EvalReport r = evaluate(segment_video(frames, cfg), truth);
    points.push_back({value, r.recall, r.precision});
  }
  return points;
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "tp,fp,fn,precision,recall,fscore\n";
  out << report.tp << ',' << report.fp << ',' << report.fn << ',' << report.precision << ','
      << report.recall << ',' << report.f_score << '\n';
  if (!report.pr_points.empty()) {
    out << "threshold,recall,precision\n";
    for (const PrPoint& p : report.pr_points) {
      out << p.threshold << ',' << p.recall << ',' << p.precision << '\n';
    }
  }
  return out.str();
}

}  // namespace stbg
