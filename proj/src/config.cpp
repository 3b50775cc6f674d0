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

#include "d3/config.hpp"

#include <cstdlib>
#include <fstream>

#include "d3/digest.hpp"
#include "d3/error.hpp"

namespace d3 {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("config key '") + key + "': " + e.what());
  }
}

std::array<double, 3> triple(const json& j, const char* key, std::array<double, 3> fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = get_or<std::vector<double>>(j, key, {});
  if (v.size() != 3) {
    throw Error(ErrorCode::ConfigError, std::string("config key '") + key + "' needs 3 values");
  }
  return {v[0], v[1], v[2]};
}

}  // namespace

void RunConfig::validate() const {
  encoder.validate();
  sampling.validate();
  if (perturbation) perturbation->validate();
  if (workers < 1) throw Error(ErrorCode::ConfigError, "workers must be >= 1");
  if (!(dt > 0.0)) throw Error(ErrorCode::ConfigError, "dt must be > 0");
}

DistanceKind distance_kind_from_string(std::string_view name) {
  if (name == "l2" || name == "L2") return DistanceKind::L2;
  if (name == "cosine" || name == "cos") return DistanceKind::Cosine;
  throw Error(ErrorCode::ConfigError, "unknown distance '" + std::string(name) + "'");
}

FeatureOrder feature_order_from_string(std::string_view name) {
  if (name == "second" || name == "2") return FeatureOrder::Second;
  if (name == "first" || name == "1") return FeatureOrder::First;
  throw Error(ErrorCode::ConfigError, "unknown feature order '" + std::string(name) + "'");
}

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  RunConfig cfg;
  if (j.contains("encoder")) {
    const json& e = j.at("encoder");
    auto& enc = cfg.encoder;
    enc.kind = encoder_kind_from_string(get_or<std::string>(e, "kind", "luminance_grid"));
    if (e.contains("model_path") && !e.at("model_path").is_null()) {
      fs::path p = get_or<std::string>(e, "model_path", "");
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      enc.model_path = p;
    }
    enc.output_name = get_or<std::string>(e, "output_name", "");
    enc.input_mean = triple(e, "input_mean", enc.input_mean);
    enc.input_std = triple(e, "input_std", enc.input_std);
    enc.output_dim = get_or<int>(e, "output_dim", enc.output_dim);
    if (e.contains("seed") && !e.at("seed").is_null()) {
      enc.seed = get_or<std::uint64_t>(e, "seed", 0);
    }
  }
  if (j.contains("sampling")) {
    const json& s = j.at("sampling");
    cfg.sampling.target_fps = get_or<double>(s, "fps", cfg.sampling.target_fps);
    cfg.sampling.max_duration_s = get_or<double>(s, "max_seconds", cfg.sampling.max_duration_s);
    cfg.sampling.max_frames = get_or<int>(
        s, "max_frames",
        SamplingPolicy::default_max_frames(cfg.sampling.target_fps,
                                           cfg.sampling.max_duration_s));
  }
  cfg.distance = distance_kind_from_string(get_or<std::string>(j, "distance", "l2"));
  cfg.order = feature_order_from_string(get_or<std::string>(j, "order", "second"));
  if (j.contains("perturbation") && !j.at("perturbation").is_null()) {
    cfg.perturbation = parse_perturbation(get_or<std::string>(j, "perturbation", ""));
  }
  cfg.skip_short_videos = get_or<bool>(j, "skip_short_videos", cfg.skip_short_videos);
  cfg.workers = get_or<unsigned>(j, "workers", cfg.workers);
  cfg.dt = get_or<double>(j, "dt", cfg.dt);
  cfg.real_pool_tag = get_or<std::string>(j, "real_pool_tag", "");
  cfg.per_subset_pools = get_or<bool>(j, "per_subset_pools", false);
  cfg.validate();
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  json enc = {
      {"kind", std::string(to_string(cfg.encoder.kind))},
      {"model_path", cfg.encoder.model_path ? json(cfg.encoder.model_path->string()) : json()},
      {"output_name", cfg.encoder.output_name},
      {"input_mean", cfg.encoder.input_mean},
      {"input_std", cfg.encoder.input_std},
      {"output_dim", cfg.encoder.output_dim},
      {"seed", cfg.encoder.seed ? json(*cfg.encoder.seed) : json()},
  };
  return json{
      {"encoder", enc},
      {"sampling",
       {{"fps", cfg.sampling.target_fps},
        {"max_seconds", cfg.sampling.max_duration_s},
        {"max_frames", cfg.sampling.max_frames}}},
      {"distance", std::string(to_string(cfg.distance))},
      {"order", std::string(to_string(cfg.order))},
      {"perturbation", cfg.perturbation ? json(cfg.perturbation->label()) : json()},
      {"skip_short_videos", cfg.skip_short_videos},
      {"workers", cfg.workers},
      {"dt", cfg.dt},
      {"real_pool_tag", cfg.real_pool_tag},
      {"per_subset_pools", cfg.per_subset_pools},
  };
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

void apply_environment(RunConfig& cfg) {
  if (const char* env = std::getenv("D3_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1) {
      throw Error(ErrorCode::ConfigError, std::string("D3_WORKERS must be a positive integer, got '") + env + "'");
    }
    cfg.workers = static_cast<unsigned>(n);
  }
}

std::string model_hash(const RunConfig& cfg) {
  if (cfg.encoder.kind != EncoderKind::ExternalModel || !cfg.encoder.model_path) return {};
  try {
    return sha256_file(*cfg.encoder.model_path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ModelError, e.what());
  }
}

std::string config_digest(const RunConfig& cfg) {
  json j = run_config_to_json(cfg);
  const std::string model = model_hash(cfg);
  if (!model.empty()) j["model_sha256"] = model;
  return sha256_hex(j.dump());
}

}  // namespace d3
