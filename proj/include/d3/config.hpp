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

#ifndef D3_CONFIG_HPP
#define D3_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "d3/encoder.hpp"
#include "d3/features.hpp"
#include "d3/frames.hpp"
#include "d3/robustness.hpp"
#include "json.hpp"

namespace d3 {

struct RunConfig {
  EncoderConfig encoder;
  SamplingPolicy sampling;
  DistanceKind distance = DistanceKind::L2;
  FeatureOrder order = FeatureOrder::Second;
  std::optional<Perturbation> perturbation;
  bool skip_short_videos = true;
  unsigned workers = 1;
  double dt = 1.0;  // sampling interval in frame units; metrics do not depend on it
  std::string real_pool_tag;
  bool per_subset_pools = false;

  void validate() const;  // ConfigError
};

/// JSON config. Missing keys keep their defaults; a relative model_path is
/// resolved against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir = {});
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies D3_WORKERS when set to a positive integer.
void apply_environment(RunConfig& cfg);

/// SHA-256 over the canonical JSON form of the config, plus the model file's
/// own SHA-256 for external encoders.
std::string config_digest(const RunConfig& cfg);

/// SHA-256 of the external model file, empty for built-in encoders.
std::string model_hash(const RunConfig& cfg);

DistanceKind distance_kind_from_string(std::string_view name);
FeatureOrder feature_order_from_string(std::string_view name);

}  // namespace d3

#endif  // D3_CONFIG_HPP
