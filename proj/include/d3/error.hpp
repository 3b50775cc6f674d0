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

#ifndef D3_ERROR_HPP
#define D3_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace d3 {

enum class ErrorCode {
  TooFewFrames,
  ShapeError,
  DegenerateVector,
  NonFinite,
  DecodeError,
  EmptySource,
  FrameTooSmall,
  ModelError,
  EncoderNumericError,
  UndefinedMetric,
  ConfigError,
  ManifestError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `index()` carries the offending
/// frame/line/minimum-count when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::DegenerateVector: return "DegenerateVector";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::EmptySource: return "EmptySource";
    case ErrorCode::FrameTooSmall: return "FrameTooSmall";
    case ErrorCode::ModelError: return "ModelError";
    case ErrorCode::EncoderNumericError: return "EncoderNumericError";
    case ErrorCode::UndefinedMetric: return "UndefinedMetric";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ManifestError: return "ManifestError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace d3

#endif  // D3_ERROR_HPP
