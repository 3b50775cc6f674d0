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

#ifndef D3_ENCODER_HPP
#define D3_ENCODER_HPP

#include <opencv2/core.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "d3/error.hpp"
#include "d3/features.hpp"
#include "d3/frames.hpp"

namespace d3 {

inline constexpr int kLuminanceGridCells = 16;
inline constexpr int kLuminanceGridDim = kLuminanceGridCells * kLuminanceGridCells;

enum class EncoderKind { ExternalModel, LuminanceGrid, RandomProjection };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::LuminanceGrid;
  std::optional<std::filesystem::path> model_path;
  /// Output tensor to read; empty selects the model's final output.
  std::string output_name;
  /// Per-channel normalization in RGB order, applied to pixels scaled to [0,1].
  std::array<double, 3> input_mean{0.0, 0.0, 0.0};
  std::array<double, 3> input_std{1.0, 1.0, 1.0};
  int output_dim = kLuminanceGridDim;
  std::optional<std::uint64_t> seed;

  void validate() const;  // ConfigError
};

/// One encoder instance per worker; implementations need not be thread-safe.
class FrameEncoder {
 public:
  virtual ~FrameEncoder() = default;
  virtual Eigen::VectorXd encode_frame(const cv::Mat& bgr) = 0;
  virtual int output_dim() const = 0;
};

std::unique_ptr<FrameEncoder> make_encoder(const EncoderConfig& cfg);

/// Mean luma over a 16x16 grid of cells, scaled to [0,1], row-major.
Eigen::VectorXd luminance_grid(const cv::Mat& bgr);

/// Fixed Gaussian matrix (output_dim x 256) with entries N(0, 1/output_dim).
EmbeddingMatrix random_projection_matrix(int output_dim, std::uint64_t seed);

EmbeddingSeries encode(const FrameSequence& seq, FrameEncoder& encoder);
EmbeddingSeries encode(const FrameSequence& seq, const EncoderConfig& cfg);

enum class BatchErrors { FailFast, Collect };

struct EncodeOutcome {
  std::optional<EmbeddingSeries> series;
  std::optional<Error> error;

  bool ok() const { return series.has_value(); }
};

/// Element i equals encode(seqs[i], cfg). FailFast rethrows the error of the
/// lowest failing index; Collect records every error in place.
std::vector<EncodeOutcome> encode_batch(std::span<const FrameSequence> seqs,
                                        const EncoderConfig& cfg,
                                        BatchErrors mode = BatchErrors::FailFast,
                                        unsigned workers = 1);

std::string_view to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(std::string_view name);  // ConfigError

}  // namespace d3

#endif  // D3_ENCODER_HPP
