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

#ifndef D3_SYNTH_HPP
#define D3_SYNTH_HPP

// Synthetic fixtures. "Real-like" clips follow a noisy second-order tracking
// system; "generated-like" clips are keyframe-interpolated copies of such
// trajectories, i.e. piecewise constant velocity.

#include <Eigen/Dense>
#include <opencv2/core.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace d3 {

/// a2 x'' + a1 x' + a0 x = u(t), with u ~ N(0, force_noise_std^2) per axis.
/// The defaults describe the corpus tracking error: a stiff, damped loop
/// whose discrete response at dt = 1 is a noise-driven jitter near the frame
/// rate (x_{k+1} = -0.8 x_k + u_k).
struct DynamicsParams {
  double inertia = 1.0;     // a2
  double damping = 1.0;     // a1
  double elasticity = 1.8;  // a0
  double force_noise_std = 0.15;
  double dt_sim = 1.0;
  int steps = 16;
  std::uint64_t seed = 0;

  void validate() const;  // ConfigError
};

using Positions = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct Trajectory {
  Positions positions;  // one row per step

  Eigen::Index size() const { return positions.rows(); }
};

using ForceFn = std::function<Eigen::Vector2d(int step)>;

/// Semi-implicit Euler:
///   a_k = (u_k - a1 v_k - a0 x_k) / a2
///   v_{k+1} = v_k + a_k dt,  x_{k+1} = x_k + v_{k+1} dt
Trajectory simulate_second_order(const DynamicsParams& p, const Eigen::Vector2d& x0,
                                 const Eigen::Vector2d& v0);
Trajectory simulate_second_order(const DynamicsParams& p, const Eigen::Vector2d& x0,
                                 const Eigen::Vector2d& v0, const ForceFn& force);

/// Mechanical energy 1/2 a2 |v|^2 + 1/2 a0 |x|^2.
double mechanical_energy(const DynamicsParams& p, const Eigen::Vector2d& x,
                         const Eigen::Vector2d& v);

/// Keeps points 0, stride, 2*stride, ... and the last point; straight lines
/// in between.
Trajectory smooth_clone(const Trajectory& traj, int stride = 4);

struct RenderOptions {
  int canvas = 256;
  int square = 16;
  std::uint64_t background_seed = 7;
};

/// Textured background, fixed for a given seed.
cv::Mat render_background(const RenderOptions& opt);

/// One BGR frame per step: a white square with area-weighted edges centred on
/// each position (clamped to the canvas) over the textured background.
std::vector<cv::Mat> render_frames(const Trajectory& traj, const RenderOptions& opt);

/// Writes frame_0000.png ... plus meta.json {"fps": fps} into `dir`.
void render_clip(const Trajectory& traj, const RenderOptions& opt,
                 const std::filesystem::path& dir, double fps = 8.0);

struct CorpusParams {
  /// Tracking-error dynamics added on top of the reference path.
  DynamicsParams dynamics;
  /// The reference moves along a straight line; its speed ramps linearly
  /// between two values drawn from [min_speed, max_speed] px per step.
  double min_speed = 0.5;
  double max_speed = 3.0;
  /// Per-clip force std is force_noise_std * s, s log-uniform in [1, spread].
  double noise_spread = 1.5;
  RenderOptions render;
  double fps = 8.0;
  std::uint64_t seed = 2024;
};

/// Seed of clip `index`, decorrelated from the base seed.
std::uint64_t clip_seed(std::uint64_t base_seed, std::uint64_t index);

/// Real-like trajectory for stream `index`: reference path plus simulated
/// tracking error. The speed ramp gives both classes similar first-order
/// spread; the jitter only survives in the real-like clips.
Trajectory corpus_trajectory(const CorpusParams& params, std::uint64_t index);

/// Writes n_real real-like clips (label 0, subset "real") and n_fake smooth
/// clones of independent trajectories (label 1, subset "smooth") under
/// out_dir/clips, plus out_dir/manifest.jsonl. Returns the manifest path.
std::filesystem::path make_corpus(int n_real, int n_fake, const CorpusParams& params,
                                  const std::filesystem::path& out_dir);

}  // namespace d3

#endif  // D3_SYNTH_HPP
