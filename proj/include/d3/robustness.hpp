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

#ifndef D3_ROBUSTNESS_HPP
#define D3_ROBUSTNESS_HPP

#include <opencv2/core.hpp>

#include <string>
#include <vector>

namespace d3 {

enum class PerturbationKind { Identity, GaussianBlur, JpegCompress };

struct Perturbation {
  PerturbationKind kind = PerturbationKind::Identity;
  double sigma = 0.0;  // GaussianBlur
  int quality = 100;   // JpegCompress

  static Perturbation identity() { return {}; }
  static Perturbation blur(double sigma) {
    return {PerturbationKind::GaussianBlur, sigma, 100};
  }
  static Perturbation jpeg(int quality) {
    return {PerturbationKind::JpegCompress, 0.0, quality};
  }

  void validate() const;     // ConfigError
  std::string label() const; // "identity", "blur:2", "jpeg:90"

  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

Perturbation parse_perturbation(const std::string& label);  // inverse of label()

/// Normalized, truncated Gaussian taps for offsets -r..r with r = ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with mirror (reflect-101) borders; sigma 0 copies.
cv::Mat gaussian_blur(const cv::Mat& frame, double sigma);

/// Per-frame perturbation; output has the input's size and type.
cv::Mat apply(const cv::Mat& frame, const Perturbation& p);

/// Gaussian sigma in {0..4} followed by JPEG q in {100, 90, 80, 70, 60}.
std::vector<Perturbation> standard_grid();

/// Grid from explicit level lists (either may be empty).
std::vector<Perturbation> make_grid(const std::vector<double>& blur_sigmas,
                                    const std::vector<int>& jpeg_qualities);

}  // namespace d3

#endif  // D3_ROBUSTNESS_HPP
