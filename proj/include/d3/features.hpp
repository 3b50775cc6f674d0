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

#ifndef D3_FEATURES_HPP
#define D3_FEATURES_HPP

// Temporal feature chain: per-frame embeddings (zero order) -> inter-frame
// distance per unit time (first order) -> change of that distance per unit
// time (second order) -> sample standard deviation as the detection score.
//
// All arithmetic is carried out in double. Embeddings produced in float are
// widened when an EmbeddingSeries is constructed.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "d3/error.hpp"

namespace d3 {

using Index = Eigen::Index;
using EmbeddingMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class FeatureOrder { First, Second };
enum class DistanceKind { L2, Cosine };

inline constexpr Index kMinFramesSecondOrder = 4;
inline constexpr Index kMinFramesFirstOrder = 3;

inline Index min_frames(FeatureOrder order) {
  return order == FeatureOrder::Second ? kMinFramesSecondOrder
                                       : kMinFramesFirstOrder;
}

/// T x N matrix of frame embeddings (row k = frame k) sampled every `dt`.
class EmbeddingSeries {
 public:
  template <typename Derived>
  explicit EmbeddingSeries(const Eigen::MatrixBase<Derived>& vectors,
                           double dt = 1.0)
      : vectors_(vectors.template cast<double>()), dt_(dt) {
    validate();
  }

  /// Builds from ragged input; unequal row lengths raise ShapeError.
  static EmbeddingSeries from_rows(const std::vector<std::vector<double>>& rows,
                                   double dt = 1.0) {
    if (rows.empty()) {
      throw Error(ErrorCode::TooFewFrames, "embedding series has no frames", 1);
    }
    const auto dim = static_cast<Index>(rows.front().size());
    EmbeddingMatrix m(static_cast<Index>(rows.size()), dim);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (static_cast<Index>(rows[k].size()) != dim) {
        throw Error(ErrorCode::ShapeError,
                    "frame " + std::to_string(k) + " has dimension " +
                        std::to_string(rows[k].size()) + ", expected " +
                        std::to_string(dim),
                    k);
      }
      for (Index j = 0; j < dim; ++j) m(static_cast<Index>(k), j) = rows[k][j];
    }
    return EmbeddingSeries(m, dt);
  }

  Index frames() const { return vectors_.rows(); }
  Index dim() const { return vectors_.cols(); }
  double dt() const { return dt_; }
  const EmbeddingMatrix& vectors() const { return vectors_; }
  auto frame(Index k) const { return vectors_.row(k); }

 private:
  void validate() const {
    if (vectors_.rows() < 1) {
      throw Error(ErrorCode::TooFewFrames, "embedding series has no frames", 1);
    }
    if (vectors_.cols() < 1) {
      throw Error(ErrorCode::ShapeError, "embedding dimension must be >= 1");
    }
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
      throw Error(ErrorCode::ShapeError, "sampling interval must be positive");
    }
    for (Index k = 0; k < vectors_.rows(); ++k) {
      if (!vectors_.row(k).allFinite()) {
        throw Error(ErrorCode::NonFinite,
                    "frame " + std::to_string(k) + " has a non-finite component",
                    static_cast<std::size_t>(k));
      }
    }
  }

  EmbeddingMatrix vectors_;
  double dt_;
};

/// F1 (length T-1) or F2 (length T-2).
struct ScalarSeries {
  Eigen::VectorXd values;
  FeatureOrder order = FeatureOrder::First;
  DistanceKind distance = DistanceKind::L2;
  double dt = 1.0;

  Index size() const { return values.size(); }
};

struct DetectionScore {
  double sigma = 0.0;
  double fake_score = 0.0;  // always -sigma: generated clips rank high
  FeatureOrder feature_order = FeatureOrder::Second;
  DistanceKind distance_kind = DistanceKind::L2;
};

// ---------------------------------------------------------------------------
// Expression-level building blocks on plain Eigen vectors.

/// (s[i+1] - s[i]) / h, length n-1.
template <typename Derived>
Eigen::VectorXd forward_difference(const Eigen::MatrixBase<Derived>& s,
                                   double h) {
  const Index n = s.size();
  if (n < 2) return Eigen::VectorXd();
  return (s.tail(n - 1) - s.head(n - 1)) / h;
}

/// Three-point stencil (s[i+1] - 2 s[i] + s[i-1]) / h^2 at interior points.
template <typename Derived>
Eigen::VectorXd central_second_difference(const Eigen::MatrixBase<Derived>& s,
                                          double h) {
  const Index n = s.size();
  if (n < 3) return Eigen::VectorXd();
  return (s.tail(n - 2) - 2.0 * s.segment(1, n - 2) + s.head(n - 2)) / (h * h);
}

/// Bessel-corrected standard deviation; requires n >= 2.
template <typename Derived>
double sample_std(const Eigen::MatrixBase<Derived>& v) {
  const Index n = v.size();
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() /
                   static_cast<double>(n - 1));
}

// ---------------------------------------------------------------------------
// Feature chain.

inline ScalarSeries first_order_l2(const EmbeddingSeries& f0) {
  const Index t = f0.frames();
  if (t < 2) {
    throw Error(ErrorCode::TooFewFrames,
                "first-order features need at least 2 frames", 2);
  }
  const auto& x = f0.vectors();
  ScalarSeries out;
  out.values = (x.bottomRows(t - 1) - x.topRows(t - 1)).rowwise().norm() /
               f0.dt();
  out.order = FeatureOrder::First;
  out.distance = DistanceKind::L2;
  out.dt = f0.dt();
  return out;
}

/// Cosine similarity (not dissimilarity) of adjacent frames divided by dt.
inline ScalarSeries first_order_cosine(const EmbeddingSeries& f0) {
  const Index t = f0.frames();
  if (t < 2) {
    throw Error(ErrorCode::TooFewFrames,
                "first-order features need at least 2 frames", 2);
  }
  const auto& x = f0.vectors();
  const Eigen::VectorXd norms = x.rowwise().norm();
  for (Index k = 0; k < t; ++k) {
    if (norms(k) == 0.0) {
      throw Error(ErrorCode::DegenerateVector,
                  "frame " + std::to_string(k) + " has a zero-norm embedding",
                  static_cast<std::size_t>(k));
    }
  }
  const Eigen::VectorXd dots =
      x.bottomRows(t - 1).cwiseProduct(x.topRows(t - 1)).rowwise().sum();
  ScalarSeries out;
  out.values = dots.cwiseQuotient(
                   norms.head(t - 1).cwiseProduct(norms.tail(t - 1))) /
               f0.dt();
  out.order = FeatureOrder::First;
  out.distance = DistanceKind::Cosine;
  out.dt = f0.dt();
  return out;
}

inline ScalarSeries first_order(const EmbeddingSeries& f0, DistanceKind kind) {
  return kind == DistanceKind::L2 ? first_order_l2(f0) : first_order_cosine(f0);
}

inline ScalarSeries second_order_diff(const ScalarSeries& f1) {
  if (f1.order != FeatureOrder::First) {
    throw Error(ErrorCode::ShapeError,
                "second-order differences take a first-order series");
  }
  if (f1.size() < 2) {
    throw Error(ErrorCode::TooFewFrames,
                "second-order features need at least 3 frames", 3);
  }
  ScalarSeries out;
  out.values = forward_difference(f1.values, f1.dt);
  out.order = FeatureOrder::Second;
  out.distance = f1.distance;
  out.dt = f1.dt;
  return out;
}

/// Sample standard deviation of a first- or second-order series.
inline DetectionScore sigma_score(const ScalarSeries& series) {
  if (series.size() < 2) {
    const auto required =
        static_cast<std::size_t>(min_frames(series.order));
    throw Error(ErrorCode::TooFewFrames,
                "volatility needs at least " + std::to_string(required) +
                    " frames",
                required);
  }
  DetectionScore score;
  score.sigma = sample_std(series.values);
  score.fake_score = -score.sigma;
  score.feature_order = series.order;
  score.distance_kind = series.distance;
  return score;
}

inline DetectionScore d3_score(const EmbeddingSeries& f0, DistanceKind kind,
                               FeatureOrder order = FeatureOrder::Second) {
  const Index required = min_frames(order);
  if (f0.frames() < required) {
    throw Error(ErrorCode::TooFewFrames,
                "got " + std::to_string(f0.frames()) + " frames, need at least " +
                    std::to_string(required),
                static_cast<std::size_t>(required));
  }
  const ScalarSeries f1 = first_order(f0, kind);
  if (order == FeatureOrder::First) return sigma_score(f1);
  return sigma_score(second_order_diff(f1));
}

inline std::string_view to_string(FeatureOrder order) {
  return order == FeatureOrder::First ? "first" : "second";
}
inline std::string_view to_string(DistanceKind kind) {
  return kind == DistanceKind::L2 ? "l2" : "cosine";
}

}  // namespace d3

#endif  // D3_FEATURES_HPP
