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

#ifndef D3_FRAMES_HPP
#define D3_FRAMES_HPP

#include <opencv2/core.hpp>

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace d3 {

inline constexpr int kFrameSize = 224;
inline constexpr int kFrameJpegQuality = 95;
inline constexpr double kCropFraction = 0.10;

struct SamplingPolicy {
  double target_fps = 8.0;
  double max_duration_s = 2.0;
  int max_frames = 16;

  /// floor(target_fps * max_duration_s)
  static int default_max_frames(double target_fps, double max_duration_s);
  void validate() const;  // ConfigError
};

/// Decoded frames of one clip, 8-bit BGR, in temporal order.
struct FrameSequence {
  std::vector<cv::Mat> frames;
  double source_fps = 0.0;
  double sample_dt = 1.0;  // frame units
  std::vector<std::size_t> source_indices;

  std::size_t size() const { return frames.size(); }
};

/// Picks one source frame per target instant k / target_fps (k = 0, 1, ...)
/// by nearest timestamp, stopping at max_duration_s, max_frames or the end of
/// the source. Ties go to the earlier frame.
std::vector<std::size_t> select_sample_indices(std::span<const double> timestamps,
                                               double source_duration_s,
                                               const SamplingPolicy& policy);

/// Reads a video file or a directory of numbered PNG/JPEG frames. A frame
/// directory may carry `meta.json` with {"fps": <rate>}; without it the
/// directory is assumed to be recorded at the policy's target rate.
FrameSequence sample_frames(const std::filesystem::path& source,
                            const SamplingPolicy& policy);

/// Removes `fraction` of the longer dimension, split evenly between both ends.
/// Square frames are cropped along the width.
cv::Mat crop_longer_edge(const cv::Mat& frame, double fraction = kCropFraction);

cv::Mat jpeg_roundtrip(const cv::Mat& frame, int quality);

/// Crop, bilinear resize to 224x224, JPEG round-trip at quality 95.
cv::Mat preprocess_frame(const cv::Mat& frame);
FrameSequence preprocess(const FrameSequence& seq);

/// Sorted list of frame image files in a directory (numeric-aware order).
std::vector<std::filesystem::path> list_frame_files(
    const std::filesystem::path& dir);

}  // namespace d3

#endif  // D3_FRAMES_HPP
