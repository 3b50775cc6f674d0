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

#include "d3/synth.hpp"

#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "d3/error.hpp"
#include "json.hpp"

namespace d3 {
namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Length of [a0, a1) intersected with [b0, b1).
double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Fake clips draw from their own streams so they do not depend on n_real.
constexpr std::uint64_t kFakeStreamOffset = std::uint64_t{1} << 32;

std::string numbered(const char* prefix, int i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%04d", prefix, i);
  return buf;
}

}  // namespace

void DynamicsParams::validate() const {
  if (!(inertia > 0.0)) throw Error(ErrorCode::ConfigError, "inertia a2 must be > 0");
  if (!(damping >= 0.0)) throw Error(ErrorCode::ConfigError, "damping a1 must be >= 0");
  if (!(elasticity >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "elasticity a0 must be >= 0");
  }
  if (!(force_noise_std >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "force noise std must be >= 0");
  }
  if (!(dt_sim > 0.0)) throw Error(ErrorCode::ConfigError, "dt_sim must be > 0");
  if (steps < 4) throw Error(ErrorCode::ConfigError, "steps must be >= 4");
}

Trajectory simulate_second_order(const DynamicsParams& p, const Eigen::Vector2d& x0,
                                 const Eigen::Vector2d& v0, const ForceFn& force) {
  p.validate();
  Trajectory traj;
  traj.positions.resize(p.steps, 2);
  Eigen::Vector2d x = x0, v = v0;
  traj.positions.row(0) = x.transpose();
  for (int k = 0; k + 1 < p.steps; ++k) {
    const Eigen::Vector2d a =
        (force(k) - p.damping * v - p.elasticity * x) / p.inertia;
    v += a * p.dt_sim;
    x += v * p.dt_sim;
    traj.positions.row(k + 1) = x.transpose();
  }
  if (!traj.positions.allFinite()) {
    throw Error(ErrorCode::NonFinite, "simulation diverged");
  }
  return traj;
}

Trajectory simulate_second_order(const DynamicsParams& p, const Eigen::Vector2d& x0,
                                 const Eigen::Vector2d& v0) {
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double std = p.force_noise_std;
  return simulate_second_order(p, x0, v0, [&](int) {
    const double ux = noise(rng);
    const double uy = noise(rng);
    return Eigen::Vector2d(std * ux, std * uy);
  });
}

double mechanical_energy(const DynamicsParams& p, const Eigen::Vector2d& x,
                         const Eigen::Vector2d& v) {
  return 0.5 * p.inertia * v.squaredNorm() + 0.5 * p.elasticity * x.squaredNorm();
}

Trajectory smooth_clone(const Trajectory& traj, int stride) {
  const Eigen::Index n = traj.size();
  if (n < 2 || stride < 1) {
    throw Error(ErrorCode::ConfigError, "smooth clone needs >= 2 points and stride >= 1");
  }
  Trajectory out;
  out.positions.resize(n, 2);
  for (Eigen::Index k0 = 0; k0 < n - 1; k0 += stride) {
    const Eigen::Index k1 = std::min<Eigen::Index>(k0 + stride, n - 1);
    const auto a = traj.positions.row(k0);
    const auto b = traj.positions.row(k1);
    for (Eigen::Index k = k0; k <= k1; ++k) {
      const double t = static_cast<double>(k - k0) / static_cast<double>(k1 - k0);
      out.positions.row(k) = (1.0 - t) * a + t * b;
    }
  }
  return out;
}

cv::Mat render_background(const RenderOptions& opt) {
  std::mt19937_64 rng(opt.background_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves(4);
  for (auto& w : waves) {
    w.fx = (unit(rng) * 2.0 - 1.0) * 0.08;
    w.fy = (unit(rng) * 2.0 - 1.0) * 0.08;
    w.phase = unit(rng) * 2.0 * std::numbers::pi;
    w.amp = 6.0 + 6.0 * unit(rng);
  }
  const double tint[3] = {60.0, 70.0, 80.0};
  cv::Mat bg(opt.canvas, opt.canvas, CV_8UC3);
  for (int y = 0; y < opt.canvas; ++y) {
    auto* row = bg.ptr<cv::Vec3b>(y);
    for (int x = 0; x < opt.canvas; ++x) {
      double v = 0.0;
      for (const auto& w : waves) v += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
      for (int c = 0; c < 3; ++c) {
        row[x][c] = static_cast<std::uint8_t>(
            std::clamp(std::lround(tint[c] + v), 0L, 255L));
      }
    }
  }
  return bg;
}

std::vector<cv::Mat> render_frames(const Trajectory& traj, const RenderOptions& opt) {
  if (opt.canvas < opt.square || opt.square < 1) {
    throw Error(ErrorCode::ConfigError, "square must fit in the canvas");
  }
  const cv::Mat bg = render_background(opt);
  const double half = opt.square / 2.0;
  std::vector<cv::Mat> frames;
  frames.reserve(static_cast<std::size_t>(traj.size()));
  for (Eigen::Index k = 0; k < traj.size(); ++k) {
    const double cx = std::clamp(traj.positions(k, 0), half, opt.canvas - half);
    const double cy = std::clamp(traj.positions(k, 1), half, opt.canvas - half);
    cv::Mat frame = bg.clone();
    const int y_lo = static_cast<int>(std::floor(cy - half));
    const int y_hi = static_cast<int>(std::ceil(cy + half));
    const int x_lo = static_cast<int>(std::floor(cx - half));
    const int x_hi = static_cast<int>(std::ceil(cx + half));
    for (int y = std::max(0, y_lo); y < std::min(opt.canvas, y_hi); ++y) {
      const double cov_y = overlap(y, y + 1, cy - half, cy + half);
      auto* row = frame.ptr<cv::Vec3b>(y);
      for (int x = std::max(0, x_lo); x < std::min(opt.canvas, x_hi); ++x) {
        const double cov = cov_y * overlap(x, x + 1, cx - half, cx + half);
        for (int c = 0; c < 3; ++c) {
          const double v = row[x][c] * (1.0 - cov) + 255.0 * cov;
          row[x][c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      }
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

void render_clip(const Trajectory& traj, const RenderOptions& opt, const fs::path& dir,
                 double fps) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const auto frames = render_frames(traj, opt);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const fs::path file = dir / (numbered("frame_", static_cast<int>(k)) + ".png");
    if (!cv::imwrite(file.string(), frames[k])) {
      throw Error(ErrorCode::IoError, "cannot write " + file.string());
    }
  }
  std::ofstream meta(dir / "meta.json");
  meta << nlohmann::json{{"fps", fps}}.dump() << "\n";
  if (!meta) throw Error(ErrorCode::IoError, "cannot write meta.json in " + dir.string());
}

std::uint64_t clip_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(splitmix64(base_seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

Trajectory corpus_trajectory(const CorpusParams& params, std::uint64_t index) {
  if (!(params.min_speed >= 0.0) || params.max_speed < params.min_speed ||
      !(params.noise_spread >= 1.0)) {
    throw Error(ErrorCode::ConfigError, "invalid corpus speed or noise range");
  }
  std::mt19937_64 rng(clip_seed(params.seed, index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double speed_start =
      params.min_speed + (params.max_speed - params.min_speed) * unit(rng);
  const double speed_end =
      params.min_speed + (params.max_speed - params.min_speed) * unit(rng);
  const double heading = 2.0 * std::numbers::pi * unit(rng);
  const double scale = std::exp(std::log(params.noise_spread) * unit(rng));

  DynamicsParams dyn = params.dynamics;
  dyn.force_noise_std *= scale;
  dyn.seed = rng();
  const int steps = dyn.steps;

  // Reference path: straight line whose speed ramps linearly from
  // speed_start to speed_end over the clip.
  const Eigen::Vector2d dir(std::cos(heading), std::sin(heading));
  std::vector<double> arc(static_cast<std::size_t>(steps), 0.0);
  for (int k = 1; k < steps; ++k) {
    const double t = steps > 2 ? static_cast<double>(k - 1) / (steps - 2) : 0.0;
    arc[k] = arc[k - 1] + speed_start + (speed_end - speed_start) * t;
  }
  const Eigen::Vector2d travel = dir * arc.back();
  // Keep the reference path (plus some slack for the error) on the canvas.
  const double margin = params.render.square / 2.0 + 24.0;
  Eigen::Vector2d start;
  for (int axis = 0; axis < 2; ++axis) {
    const double lo = margin - std::min(0.0, travel(axis));
    const double hi = params.render.canvas - margin - std::max(0.0, travel(axis));
    start(axis) = hi > lo ? lo + (hi - lo) * unit(rng) : params.render.canvas / 2.0;
  }

  const Trajectory error = simulate_second_order(dyn, Eigen::Vector2d::Zero(),
                                                 Eigen::Vector2d::Zero());
  Trajectory traj;
  traj.positions.resize(steps, 2);
  for (int k = 0; k < steps; ++k) {
    traj.positions.row(k) = (start + dir * arc[k]).transpose() + error.positions.row(k);
  }
  return traj;
}

fs::path make_corpus(int n_real, int n_fake, const CorpusParams& params,
                     const fs::path& out_dir) {
  if (n_real < 1 || n_fake < 1) {
    throw Error(ErrorCode::ConfigError, "corpus needs at least one clip of each class");
  }
  params.dynamics.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "clips", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string());

  const fs::path manifest = out_dir / "manifest.jsonl";
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + manifest.string());

  auto emit = [&](const std::string& id, int label, const char* subset) {
    nlohmann::ordered_json row;
    row["path"] = "clips/" + id;
    row["label"] = label;
    row["subset"] = subset;
    row["id"] = id;
    out << row.dump() << "\n";
  };
  for (int i = 0; i < n_real; ++i) {
    const std::string id = numbered("real_", i);
    render_clip(corpus_trajectory(params, static_cast<std::uint64_t>(i)), params.render,
                out_dir / "clips" / id, params.fps);
    emit(id, 0, "real");
  }
  for (int i = 0; i < n_fake; ++i) {
    const std::string id = numbered("smooth_", i);
    const auto source = corpus_trajectory(params, kFakeStreamOffset + static_cast<std::uint64_t>(i));
    render_clip(smooth_clone(source), params.render, out_dir / "clips" / id, params.fps);
    emit(id, 1, "smooth");
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + manifest.string());
  return manifest;
}

}  // namespace d3
