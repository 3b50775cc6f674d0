// Copyright 2026 The D3 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "d3/frames.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "d3/error.hpp"
#include "json.hpp"

namespace d3 {
namespace fs = std::filesystem;

namespace {

constexpr double kTimeEps = 1e-9;

bool is_frame_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// "frame_2.png" < "frame_10.png"
bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      std::string na = a.substr(i, ie - i), nb = b.substr(j, je - j);
      na.erase(0, std::min(na.find_first_not_of('0'), na.size()));
      nb.erase(0, std::min(nb.find_first_not_of('0'), nb.size()));
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
  return a < b;
}

cv::Mat ensure_bgr(cv::Mat m) {
  if (m.channels() == 1) cv::cvtColor(m, m, cv::COLOR_GRAY2BGR);
  if (m.channels() == 4) cv::cvtColor(m, m, cv::COLOR_BGRA2BGR);
  if (m.depth() != CV_8U) {
    throw Error(ErrorCode::DecodeError, "only 8-bit frames are supported");
  }
  return m;
}

double read_directory_fps(const fs::path& dir, double fallback) {
  const fs::path meta = dir / "meta.json";
  if (!fs::exists(meta)) return fallback;
  std::ifstream in(meta);
  try {
    const auto j = nlohmann::json::parse(in);
    const double fps = j.value("fps", fallback);
    if (!(fps > 0.0)) {
      throw Error(ErrorCode::DecodeError, meta.string() + ": fps must be > 0");
    }
    return fps;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::DecodeError, meta.string() + ": " + e.what());
  }
}

FrameSequence sample_directory(const fs::path& dir, const SamplingPolicy& policy) {
  const auto files = list_frame_files(dir);
  if (files.empty()) {
    throw Error(ErrorCode::EmptySource, dir.string() + " contains no frames");
  }
  const double fps = read_directory_fps(dir, policy.target_fps);
  std::vector<double> timestamps(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    timestamps[i] = static_cast<double>(i) / fps;
  }
  const double duration = static_cast<double>(files.size()) / fps;

  FrameSequence seq;
  seq.source_fps = fps;
  seq.source_indices = select_sample_indices(timestamps, duration, policy);
  seq.frames.reserve(seq.source_indices.size());
  for (const std::size_t idx : seq.source_indices) {
    cv::Mat m = cv::imread(files[idx].string(), cv::IMREAD_COLOR);
    if (m.empty()) {
      throw Error(ErrorCode::DecodeError, "cannot decode " + files[idx].string(),
                  idx);
    }
    seq.frames.push_back(ensure_bgr(std::move(m)));
  }
  return seq;
}

FrameSequence sample_video(const fs::path& path, const SamplingPolicy& policy) {
  cv::VideoCapture cap(path.string());
  if (!cap.isOpened()) {
    throw Error(ErrorCode::DecodeError, "cannot open video " + path.string());
  }
  double fps = cap.get(cv::CAP_PROP_FPS);
  if (!(fps > 0.0) || !std::isfinite(fps)) fps = 0.0;

  std::vector<cv::Mat> decoded;
  std::vector<double> stamps;
  bool stamps_usable = true;
  bool reached_end = true;
  // Decode only as far as the sampling window needs.
  const double horizon = policy.max_duration_s + (fps > 0.0 ? 2.0 / fps : 1.0);
  cv::Mat frame;
  while (cap.read(frame)) {
    const double ms = cap.get(cv::CAP_PROP_POS_MSEC);
    const double ts = ms / 1000.0;
    if (!std::isfinite(ts) || (!stamps.empty() && ts <= stamps.back())) {
      stamps_usable = false;
    }
    stamps.push_back(ts);
    decoded.push_back(ensure_bgr(frame.clone()));
    const double approx = fps > 0.0 ? static_cast<double>(decoded.size() - 1) / fps
                                    : ts;
    if ((stamps_usable ? ts - stamps.front() : approx) > horizon) {
      reached_end = false;
      break;
    }
  }
  if (decoded.empty()) {
    throw Error(ErrorCode::EmptySource, path.string() + " has no frames");
  }
  if (!stamps_usable) {
    if (fps <= 0.0) {
      throw Error(ErrorCode::DecodeError,
                  path.string() + " has neither timestamps nor a frame rate");
    }
    for (std::size_t i = 0; i < stamps.size(); ++i) {
      stamps[i] = static_cast<double>(i) / fps;
    }
  } else {
    const double origin = stamps.front();
    for (double& s : stamps) s -= origin;
  }
  double frame_period = fps > 0.0 ? 1.0 / fps : 0.0;
  if (frame_period == 0.0 && stamps.size() > 1) {
    frame_period = stamps.back() / static_cast<double>(stamps.size() - 1);
  }
  const double duration = reached_end ? stamps.back() + frame_period
                                      : std::numeric_limits<double>::infinity();

  FrameSequence seq;
  seq.source_fps = fps > 0.0 ? fps : 1.0 / frame_period;
  seq.source_indices = select_sample_indices(stamps, duration, policy);
  for (const std::size_t idx : seq.source_indices) {
    seq.frames.push_back(decoded[idx]);
  }
  return seq;
}

}  // namespace

int SamplingPolicy::default_max_frames(double target_fps, double max_duration_s) {
  return static_cast<int>(std::floor(target_fps * max_duration_s + kTimeEps));
}

void SamplingPolicy::validate() const {
  if (!(target_fps > 0.0) || !std::isfinite(target_fps)) {
    throw Error(ErrorCode::ConfigError, "target fps must be positive");
  }
  if (!(max_duration_s > 0.0) || !std::isfinite(max_duration_s)) {
    throw Error(ErrorCode::ConfigError, "max duration must be positive");
  }
  if (max_frames < 1) {
    throw Error(ErrorCode::ConfigError, "max frames must be >= 1");
  }
}

std::vector<std::size_t> select_sample_indices(std::span<const double> timestamps,
                                               double source_duration_s,
                                               const SamplingPolicy& policy) {
  policy.validate();
  std::vector<std::size_t> picked;
  if (timestamps.empty()) return picked;
  for (int k = 0; k < policy.max_frames; ++k) {
    const double t = static_cast<double>(k) / policy.target_fps;
    if (t >= policy.max_duration_s - kTimeEps) break;
    if (t >= source_duration_s - kTimeEps) break;
    const auto it = std::lower_bound(timestamps.begin(), timestamps.end(), t);
    std::size_t idx;
    if (it == timestamps.end()) {
      idx = timestamps.size() - 1;
    } else if (it == timestamps.begin()) {
      idx = 0;
    } else {
      const auto hi = static_cast<std::size_t>(it - timestamps.begin());
      idx = (t - timestamps[hi - 1] <= timestamps[hi] - t) ? hi - 1 : hi;
    }
    picked.push_back(idx);
  }
  return picked;
}

std::vector<fs::path> list_frame_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_frame_file(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return natural_less(a.filename().string(), b.filename().string());
  });
  return files;
}

FrameSequence sample_frames(const fs::path& source, const SamplingPolicy& policy) {
  policy.validate();
  std::error_code ec;
  if (!fs::exists(source, ec)) {
    throw Error(ErrorCode::DecodeError, source.string() + " does not exist");
  }
  FrameSequence seq = fs::is_directory(source) ? sample_directory(source, policy)
                                               : sample_video(source, policy);
  seq.sample_dt = 1.0;
  return seq;
}

cv::Mat crop_longer_edge(const cv::Mat& frame, double fraction) {
  const int rows = frame.rows;
  const int cols = frame.cols;
  const bool along_width = cols >= rows;
  const int longer = along_width ? cols : rows;
  const int removed = static_cast<int>(std::lround(longer * fraction));
  const int kept = longer - removed;
  const int offset = removed / 2;
  const int out_rows = along_width ? rows : kept;
  const int out_cols = along_width ? kept : cols;
  if (out_rows < 2 || out_cols < 2) {
    throw Error(ErrorCode::FrameTooSmall,
                "frame of " + std::to_string(cols) + "x" + std::to_string(rows) +
                    " is smaller than 2x2 after cropping");
  }
  const cv::Rect roi = along_width ? cv::Rect(offset, 0, kept, rows)
                                   : cv::Rect(0, offset, cols, kept);
  return frame(roi).clone();
}

cv::Mat jpeg_roundtrip(const cv::Mat& frame, int quality) {
  if (quality < 1 || quality > 100) {
    throw Error(ErrorCode::ConfigError,
                "JPEG quality must be in [1, 100], got " + std::to_string(quality));
  }
  std::vector<unsigned char> buf;
  if (!cv::imencode(".jpg", frame, buf, {cv::IMWRITE_JPEG_QUALITY, quality})) {
    throw Error(ErrorCode::DecodeError, "JPEG encoding failed");
  }
  cv::Mat out = cv::imdecode(buf, cv::IMREAD_COLOR);
  if (out.empty()) throw Error(ErrorCode::DecodeError, "JPEG decoding failed");
  return out;
}

cv::Mat preprocess_frame(const cv::Mat& frame) {
  if (frame.empty()) {
    throw Error(ErrorCode::FrameTooSmall, "empty frame");
  }
  const cv::Mat cropped = crop_longer_edge(frame);
  cv::Mat resized;
  cv::resize(cropped, resized, cv::Size(kFrameSize, kFrameSize), 0, 0,
             cv::INTER_LINEAR);
  return jpeg_roundtrip(resized, kFrameJpegQuality);
}

FrameSequence preprocess(const FrameSequence& seq) {
  if (seq.frames.empty()) {
    throw Error(ErrorCode::EmptySource, "cannot preprocess an empty sequence");
  }
  FrameSequence out;
  out.source_fps = seq.source_fps;
  out.sample_dt = seq.sample_dt;
  out.source_indices = seq.source_indices;
  out.frames.reserve(seq.frames.size());
  for (const auto& f : seq.frames) out.frames.push_back(preprocess_frame(f));
  return out;
}

}  // namespace d3
