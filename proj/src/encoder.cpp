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

#include "d3/encoder.hpp"

#include <opencv2/dnn.hpp>

#include <cmath>
#include <random>

#include "d3/parallel.hpp"

namespace d3 {
namespace {

class LuminanceGridEncoder final : public FrameEncoder {
 public:
  Eigen::VectorXd encode_frame(const cv::Mat& bgr) override {
    return luminance_grid(bgr);
  }
  int output_dim() const override { return kLuminanceGridDim; }
};

class RandomProjectionEncoder final : public FrameEncoder {
 public:
  RandomProjectionEncoder(int output_dim, std::uint64_t seed)
      : projection_(random_projection_matrix(output_dim, seed)) {}

  Eigen::VectorXd encode_frame(const cv::Mat& bgr) override {
    return projection_ * luminance_grid(bgr);
  }
  int output_dim() const override {
    return static_cast<int>(projection_.rows());
  }

 private:
  EmbeddingMatrix projection_;
};

class ExternalModelEncoder final : public FrameEncoder {
 public:
  explicit ExternalModelEncoder(const EncoderConfig& cfg) : cfg_(cfg) {
    try {
      net_ = cv::dnn::readNet(cfg.model_path->string());
    } catch (const cv::Exception& e) {
      throw Error(ErrorCode::ModelError,
                  "cannot load " + cfg.model_path->string() + ": " + e.what());
    }
    if (net_.empty()) {
      throw Error(ErrorCode::ModelError,
                  "cannot load " + cfg.model_path->string());
    }
    net_.setPreferableBackend(cv::dnn::DNN_BACKEND_OPENCV);
    net_.setPreferableTarget(cv::dnn::DNN_TARGET_CPU);
  }

  Eigen::VectorXd encode_frame(const cv::Mat& bgr) override {
    if (bgr.rows != kFrameSize || bgr.cols != kFrameSize || bgr.type() != CV_8UC3) {
      throw Error(ErrorCode::ShapeError, "external models take 224x224 BGR frames");
    }
    // NCHW, RGB, (x/255 - mean) / std
    const int dims[] = {1, 3, kFrameSize, kFrameSize};
    cv::Mat blob(4, dims, CV_32F);
    auto* out = blob.ptr<float>();
    const std::size_t plane = static_cast<std::size_t>(kFrameSize) * kFrameSize;
    for (int y = 0; y < kFrameSize; ++y) {
      const auto* row = bgr.ptr<cv::Vec3b>(y);
      for (int x = 0; x < kFrameSize; ++x) {
        const std::size_t at = static_cast<std::size_t>(y) * kFrameSize + x;
        for (int c = 0; c < 3; ++c) {
          const double v = row[x][2 - c] / 255.0;
          out[c * plane + at] =
              static_cast<float>((v - cfg_.input_mean[c]) / cfg_.input_std[c]);
        }
      }
    }
    cv::Mat result;
    try {
      net_.setInput(blob);
      result = cfg_.output_name.empty() ? net_.forward()
                                        : net_.forward(cfg_.output_name);
    } catch (const cv::Exception& e) {
      throw Error(ErrorCode::ModelError, std::string("forward pass failed: ") + e.what());
    }
    if (static_cast<int>(result.total()) != cfg_.output_dim) {
      throw Error(ErrorCode::ModelError,
                  "model output has " + std::to_string(result.total()) +
                      " values, config expects " + std::to_string(cfg_.output_dim));
    }
    cv::Mat flat;
    result.reshape(1, 1).convertTo(flat, CV_64F);
    Eigen::VectorXd v(cfg_.output_dim);
    for (int i = 0; i < cfg_.output_dim; ++i) v(i) = flat.at<double>(0, i);
    if (!v.allFinite()) {
      throw Error(ErrorCode::EncoderNumericError, "model produced non-finite output");
    }
    return v;
  }

  int output_dim() const override { return cfg_.output_dim; }

 private:
  EncoderConfig cfg_;
  cv::dnn::Net net_;
};

}  // namespace

void EncoderConfig::validate() const {
  if (kind == EncoderKind::ExternalModel) {
    if (!model_path || model_path->empty()) {
      throw Error(ErrorCode::ConfigError, "external model encoder needs model_path");
    }
  } else if (model_path) {
    throw Error(ErrorCode::ConfigError,
                std::string(to_string(kind)) + " encoder does not take a model_path");
  }
  for (int c = 0; c < 3; ++c) {
    if (!(input_std[c] > 0.0) || !std::isfinite(input_std[c]) ||
        !std::isfinite(input_mean[c])) {
      throw Error(ErrorCode::ConfigError, "input_std must be positive and finite");
    }
  }
  if (output_dim < 1) {
    throw Error(ErrorCode::ConfigError, "output_dim must be >= 1");
  }
  if (kind == EncoderKind::LuminanceGrid && output_dim != kLuminanceGridDim) {
    throw Error(ErrorCode::ConfigError, "luminance grid output_dim is fixed at 256");
  }
}

Eigen::VectorXd luminance_grid(const cv::Mat& bgr) {
  if (bgr.type() != CV_8UC3 || bgr.rows < kLuminanceGridCells ||
      bgr.cols < kLuminanceGridCells) {
    throw Error(ErrorCode::ShapeError, "luminance grid needs an 8-bit BGR frame >= 16x16");
  }
  Eigen::VectorXd out(kLuminanceGridDim);
  const int n = kLuminanceGridCells;
  for (int gy = 0; gy < n; ++gy) {
    const int y0 = gy * bgr.rows / n, y1 = (gy + 1) * bgr.rows / n;
    for (int gx = 0; gx < n; ++gx) {
      const int x0 = gx * bgr.cols / n, x1 = (gx + 1) * bgr.cols / n;
      // Integer Rec.601 weights keep white exactly at 1.0.
      std::int64_t sum = 0;
      for (int y = y0; y < y1; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = x0; x < x1; ++x) {
          sum += 114 * row[x][0] + 587 * row[x][1] + 299 * row[x][2];
        }
      }
      const auto count = static_cast<std::int64_t>(y1 - y0) * (x1 - x0);
      out(gy * n + gx) =
          static_cast<double>(sum) / (255000.0 * static_cast<double>(count));
    }
  }
  return out;
}

EmbeddingMatrix random_projection_matrix(int output_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(output_dim));
  EmbeddingMatrix m(output_dim, kLuminanceGridDim);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  }
  return m;
}

std::unique_ptr<FrameEncoder> make_encoder(const EncoderConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case EncoderKind::LuminanceGrid:
      return std::make_unique<LuminanceGridEncoder>();
    case EncoderKind::RandomProjection:
      return std::make_unique<RandomProjectionEncoder>(cfg.output_dim,
                                                       cfg.seed.value_or(0));
    case EncoderKind::ExternalModel:
      return std::make_unique<ExternalModelEncoder>(cfg);
  }
  throw Error(ErrorCode::ConfigError, "unknown encoder kind");
}

EmbeddingSeries encode(const FrameSequence& seq, FrameEncoder& encoder) {
  if (seq.frames.empty()) {
    throw Error(ErrorCode::TooFewFrames, "cannot encode an empty sequence", 1);
  }
  EmbeddingMatrix m(static_cast<Index>(seq.frames.size()), encoder.output_dim());
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    const Eigen::VectorXd v = encoder.encode_frame(seq.frames[k]);
    if (!v.allFinite()) {
      throw Error(ErrorCode::EncoderNumericError,
                  "non-finite embedding at frame " + std::to_string(k), k);
    }
    m.row(static_cast<Index>(k)) = v.transpose();
  }
  return EmbeddingSeries(m, seq.sample_dt);
}

EmbeddingSeries encode(const FrameSequence& seq, const EncoderConfig& cfg) {
  auto encoder = make_encoder(cfg);
  return encode(seq, *encoder);
}

std::vector<EncodeOutcome> encode_batch(std::span<const FrameSequence> seqs,
                                        const EncoderConfig& cfg, BatchErrors mode,
                                        unsigned workers) {
  cfg.validate();
  std::vector<EncodeOutcome> out(seqs.size());
  if (seqs.empty()) return out;
  const unsigned n_workers = std::max(1u, std::min<unsigned>(
                                              workers, static_cast<unsigned>(seqs.size())));
  std::vector<std::unique_ptr<FrameEncoder>> encoders(n_workers);
  parallel_for(seqs.size(), n_workers, [&](unsigned w, std::size_t i) {
    if (!encoders[w]) encoders[w] = make_encoder(cfg);
    try {
      out[i].series = encode(seqs[i], *encoders[w]);
    } catch (const Error& e) {
      out[i].error = e;
    }
  });
  if (mode == BatchErrors::FailFast) {
    for (const auto& o : out) {
      if (o.error) throw *o.error;
    }
  }
  return out;
}

std::string_view to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::ExternalModel: return "external";
    case EncoderKind::LuminanceGrid: return "luminance_grid";
    case EncoderKind::RandomProjection: return "random_projection";
  }
  return "unknown";
}

EncoderKind encoder_kind_from_string(std::string_view name) {
  if (name == "external" || name == "onnx") return EncoderKind::ExternalModel;
  if (name == "luminance_grid") return EncoderKind::LuminanceGrid;
  if (name == "random_projection") return EncoderKind::RandomProjection;
  throw Error(ErrorCode::ConfigError, "unknown encoder kind '" + std::string(name) + "'");
}

}  // namespace d3
