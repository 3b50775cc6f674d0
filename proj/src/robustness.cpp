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

#include "d3/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "d3/error.hpp"
#include "d3/frames.hpp"

#include <opencv2/imgproc.hpp>

namespace d3 {

void Perturbation::validate() const {
  switch (kind) {
    case PerturbationKind::Identity:
      return;
    case PerturbationKind::GaussianBlur:
      if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorCode::ConfigError, "blur sigma must be >= 0");
      }
      return;
    case PerturbationKind::JpegCompress:
      if (quality < 1 || quality > 100) {
        throw Error(ErrorCode::ConfigError,
                    "JPEG quality must be in [1, 100], got " + std::to_string(quality));
      }
      return;
  }
}

std::string Perturbation::label() const {
  std::ostringstream os;
  switch (kind) {
    case PerturbationKind::Identity: os << "identity"; break;
    case PerturbationKind::GaussianBlur: os << "blur:" << sigma; break;
    case PerturbationKind::JpegCompress: os << "jpeg:" << quality; break;
  }
  return os.str();
}

Perturbation parse_perturbation(const std::string& label) {
  if (label == "identity" || label == "none") return Perturbation::identity();
  const auto colon = label.find(':');
  if (colon != std::string::npos) {
    const std::string kind = label.substr(0, colon);
    const std::string value = label.substr(colon + 1);
    try {
      std::size_t used = 0;
      Perturbation p;
      if (kind == "blur") {
        p = Perturbation::blur(std::stod(value, &used));
      } else if (kind == "jpeg") {
        p = Perturbation::jpeg(std::stoi(value, &used));
      } else {
        used = std::string::npos;
      }
      if (used == value.size()) {
        p.validate();
        return p;
      }
    } catch (const std::logic_error&) {
    }
  }
  throw Error(ErrorCode::ConfigError, "cannot parse perturbation '" + label + "'");
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma == 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[i + radius] = w;
    sum += w;
  }
  for (double& w : k) w /= sum;
  return k;
}

cv::Mat gaussian_blur(const cv::Mat& frame, double sigma) {
  Perturbation::blur(sigma).validate();
  if (frame.depth() != CV_8U) {
    throw Error(ErrorCode::ConfigError, "blur expects an 8-bit frame");
  }
  if (sigma == 0.0) return frame.clone();
  const auto taps = gaussian_kernel(sigma);
  cv::Mat kernel;
  cv::Mat(static_cast<int>(taps.size()), 1, CV_64F, const_cast<double*>(taps.data()))
      .convertTo(kernel, CV_32F);
  cv::Mat blurred, out;
  cv::sepFilter2D(frame, blurred, CV_32F, kernel, kernel, cv::Point(-1, -1), 0.0,
                  cv::BORDER_REFLECT_101);
  blurred.convertTo(out, frame.type());
  return out;
}

cv::Mat apply(const cv::Mat& frame, const Perturbation& p) {
  p.validate();
  switch (p.kind) {
    case PerturbationKind::Identity: return frame.clone();
    case PerturbationKind::GaussianBlur: return gaussian_blur(frame, p.sigma);
    case PerturbationKind::JpegCompress: return jpeg_roundtrip(frame, p.quality);
  }
  throw Error(ErrorCode::ConfigError, "unknown perturbation");
}

std::vector<Perturbation> make_grid(const std::vector<double>& blur_sigmas,
                                    const std::vector<int>& jpeg_qualities) {
  std::vector<Perturbation> grid;
  for (double s : blur_sigmas) grid.push_back(Perturbation::blur(s));
  for (int q : jpeg_qualities) grid.push_back(Perturbation::jpeg(q));
  for (const auto& p : grid) p.validate();
  return grid;
}

std::vector<Perturbation> standard_grid() {
  return make_grid({0, 1, 2, 3, 4}, {100, 90, 80, 70, 60});
}

}  // namespace d3
