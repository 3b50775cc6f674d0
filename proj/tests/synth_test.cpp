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

#include <gtest/gtest.h>
#include <opencv2/core.hpp>

#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "d3/encoder.hpp"
#include "d3/error.hpp"
#include "d3/features.hpp"
#include "d3/frames.hpp"
#include "d3/harness.hpp"
#include "test_util.hpp"

namespace d3 {
namespace {

namespace fs = std::filesystem;

// Classical RK4 on the unforced system, one axis pair at a time.
Positions rk4_reference(const DynamicsParams& p, Eigen::Vector2d x, Eigen::Vector2d v,
                        int substeps) {
  const double h = p.dt_sim / substeps;
  auto acc = [&](const Eigen::Vector2d& xx, const Eigen::Vector2d& vv) {
    return Eigen::Vector2d((-p.damping * vv - p.elasticity * xx) / p.inertia);
  };
  Positions out(p.steps, 2);
  out.row(0) = x.transpose();
  for (int k = 1; k < p.steps; ++k) {
    for (int s = 0; s < substeps; ++s) {
      const Eigen::Vector2d k1x = v, k1v = acc(x, v);
      const Eigen::Vector2d k2x = v + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x, k2x);
      const Eigen::Vector2d k3x = v + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x, k3x);
      const Eigen::Vector2d k4x = v + h * k3v, k4v = acc(x + h * k3x, k4x);
      x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
      v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
    out.row(k) = x.transpose();
  }
  return out;
}

ForceFn zero_force() {
  return [](int) { return Eigen::Vector2d::Zero().eval(); };
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

double clip_sigma(const Trajectory& t, FeatureOrder order = FeatureOrder::Second) {
  FrameSequence seq;
  seq.frames = render_frames(t, RenderOptions{});
  auto f0 = encode(preprocess(seq), EncoderConfig{});
  return d3_score(f0, DistanceKind::L2, order).sigma;
}

TEST(Dynamics, Validation) {
  DynamicsParams p;
  p.inertia = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.steps = 3;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.damping = -1;
  EXPECT_THROW(p.validate(), Error);
}

TEST(Dynamics, RestStaysAtRest) {
  DynamicsParams p;
  p.elasticity = 0;
  p.force_noise_std = 0;
  auto t = simulate_second_order(p, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero());
  EXPECT_EQ(t.size(), p.steps);
  EXPECT_TRUE((t.positions.array() == 0.0).all());
}

TEST(Dynamics, ConstantForceDoubleSum) {
  DynamicsParams p;
  p.inertia = 2.5;
  p.damping = 0;
  p.elasticity = 0;
  p.dt_sim = 1;
  p.steps = 6;
  auto t = simulate_second_order(p, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(),
                                 [&](int) { return Eigen::Vector2d(p.inertia, 0.0); });
  const double expect[] = {0, 1, 3, 6, 10, 15};
  for (int k = 0; k < 6; ++k) {
    EXPECT_EQ(t.positions(k, 0), expect[k]);
    EXPECT_EQ(t.positions(k, 1), 0.0);
  }
}

TEST(Dynamics, SeededNoiseIsDeterministic) {
  DynamicsParams p;
  p.seed = 42;
  auto a = simulate_second_order(p, Eigen::Vector2d(1, 2), Eigen::Vector2d::Zero());
  auto b = simulate_second_order(p, Eigen::Vector2d(1, 2), Eigen::Vector2d::Zero());
  EXPECT_TRUE((a.positions.array() == b.positions.array()).all());
  p.seed = 43;
  auto c = simulate_second_order(p, Eigen::Vector2d(1, 2), Eigen::Vector2d::Zero());
  EXPECT_FALSE((a.positions.array() == c.positions.array()).all());
}

TEST(Dynamics, DampedCaseAgreesWithFineReference) {
  DynamicsParams p;
  p.inertia = 1.0;
  p.damping = 1.0;
  p.elasticity = 2.0;
  p.dt_sim = 0.02;
  p.steps = 500;
  const Eigen::Vector2d x0(0.0, 0.0), v0(1.0, -0.5);
  auto t = simulate_second_order(p, x0, v0, zero_force());
  EXPECT_LT(t.positions.row(p.steps - 1).norm(), t.positions.row(1).norm());
  const Positions ref = rk4_reference(p, x0, v0, 100);
  const double err = (t.positions - ref).cwiseAbs().maxCoeff();
  EXPECT_LE(err / ref.cwiseAbs().maxCoeff(), 0.05);
}

TEST(Dynamics, EnergyNonIncreasingWhenDamped) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    DynamicsParams p;
    p.inertia = 0.5 + 2.0 * u(rng);
    p.damping = p.inertia * (0.2 + 1.8 * u(rng));
    p.elasticity = p.inertia * 10.0 * u(rng);
    p.dt_sim = 0.001 + 0.019 * u(rng);
    p.steps = 200;
    Eigen::Vector2d x(u(rng) - 0.5, u(rng) - 0.5), v(u(rng) - 0.5, u(rng) - 0.5);
    double prev = mechanical_energy(p, x, v);
    // Step one at a time so velocities are available.
    for (int k = 0; k < p.steps; ++k) {
      const Eigen::Vector2d a = (-p.damping * v - p.elasticity * x) / p.inertia;
      v += a * p.dt_sim;
      x += v * p.dt_sim;
      const double e = mechanical_energy(p, x, v);
      ASSERT_LE(e, prev * (1 + 1e-12)) << "trial " << trial << " step " << k;
      prev = e;
    }
    DynamicsParams q = p;
    q.steps = 50;
    auto t = simulate_second_order(q, Eigen::Vector2d(1, 0), Eigen::Vector2d::Zero(),
                                   zero_force());
    EXPECT_LE(t.positions.row(q.steps - 1).norm(), 1.0);
  }
}

TEST(SmoothClone, LinearIsFixedPoint) {
  Trajectory t;
  t.positions.resize(16, 2);
  for (int k = 0; k < 16; ++k) t.positions.row(k) << 10 + 1.5 * k, 20 - 0.25 * k;
  auto c = smooth_clone(t);
  EXPECT_LE((c.positions - t.positions).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SmoothClone, PiecewiseLinearBetweenKeyframes) {
  DynamicsParams p;
  p.seed = 9;
  p.force_noise_std = 3;
  auto t = simulate_second_order(p, Eigen::Vector2d(100, 100), Eigen::Vector2d(1, 1));
  auto c = smooth_clone(t);
  ASSERT_EQ(c.size(), t.size());
  const Eigen::Index n = t.size();
  for (Eigen::Index k = 0; k < n; k += 4) EXPECT_EQ(c.positions.row(k), t.positions.row(k));
  EXPECT_EQ(c.positions.row(n - 1), t.positions.row(n - 1));
  for (Eigen::Index k = 1; k + 1 < n; ++k) {
    if (k % 4 == 0) continue;
    const Eigen::RowVector2d d2 =
        c.positions.row(k + 1) - 2 * c.positions.row(k) + c.positions.row(k - 1);
    EXPECT_LE(d2.cwiseAbs().maxCoeff(), 1e-9) << k;
  }
  // Displacement over each segment matches the source.
  for (Eigen::Index k0 = 0; k0 < n - 1; k0 += 4) {
    const Eigen::Index k1 = std::min<Eigen::Index>(k0 + 4, n - 1);
    Eigen::RowVector2d sum_c = Eigen::RowVector2d::Zero(), sum_t = sum_c;
    for (Eigen::Index k = k0; k < k1; ++k) {
      sum_c += c.positions.row(k + 1) - c.positions.row(k);
      sum_t += t.positions.row(k + 1) - t.positions.row(k);
    }
    EXPECT_LE((sum_c - sum_t).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Render, StillTrajectoryGivesIdenticalFrames) {
  Trajectory t;
  t.positions = Positions::Constant(5, 2, 128.0);
  auto frames = render_frames(t, RenderOptions{});
  ASSERT_EQ(frames.size(), 5u);
  EXPECT_EQ(frames[0].size(), cv::Size(256, 256));
  for (const auto& f : frames) EXPECT_EQ(cv::norm(f, frames[0], cv::NORM_INF), 0.0);
  EXPECT_EQ(frames[0].at<cv::Vec3b>(128, 128), cv::Vec3b(255, 255, 255));
}

TEST(Render, Locality) {
  Trajectory a;
  a.positions.resize(6, 2);
  for (int k = 0; k < 6; ++k) a.positions.row(k) << 60 + 3.3 * k, 90 + 1.7 * k;
  Trajectory b = a;
  b.positions.row(3) << 150, 150;
  auto fa = render_frames(a, RenderOptions{});
  auto fb = render_frames(b, RenderOptions{});
  for (int k = 0; k < 6; ++k) {
    const double d = cv::norm(fa[k], fb[k], cv::NORM_INF);
    if (k == 3) EXPECT_GT(d, 0.0);
    else EXPECT_EQ(d, 0.0) << k;
  }
}

TEST(Render, BackgroundIsTextured) {
  auto bg = render_background(RenderOptions{});
  cv::Scalar mean, stddev;
  cv::meanStdDev(bg, mean, stddev);
  EXPECT_GT(stddev[0], 3.0);
}

TEST(Corpus, SmallManifest) {
  auto dir = d3::testing::scratch_dir("corpus");
  auto manifest = make_corpus(1, 1, CorpusParams{}, dir);
  auto entries = load_manifest(manifest);
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].label, 0);
  EXPECT_EQ(entries[1].label, 1);
  EXPECT_EQ(entries[1].subset, "smooth");
  EXPECT_EQ(list_frame_files(entries[0].path).size(), 16u);
  EXPECT_THROW(make_corpus(0, 1, CorpusParams{}, dir), Error);
}

TEST(Corpus, SameSeedSameBytes) {
  auto a = d3::testing::scratch_dir("a");
  auto b = d3::testing::scratch_dir("b");
  CorpusParams params;
  params.seed = 77;
  make_corpus(2, 2, params, a);
  make_corpus(2, 2, params, b);
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    EXPECT_EQ(read_file(e.path()), read_file(b / rel)) << rel;
    ++compared;
  }
  EXPECT_EQ(compared, 1u + 4u * 17u);
}

TEST(Corpus, FakeStreamsIndependentOfRealCount) {
  CorpusParams params;
  auto t1 = corpus_trajectory(params, 3);
  auto t2 = corpus_trajectory(params, 3);
  EXPECT_TRUE((t1.positions.array() == t2.positions.array()).all());
  EXPECT_NE(clip_seed(params.seed, 3), clip_seed(params.seed, 4));
  EXPECT_NE(clip_seed(1, 3), clip_seed(2, 3));
}

TEST(Corpus, TrajectoriesStayOnCanvas) {
  CorpusParams params;
  for (std::uint64_t i = 0; i < 200; ++i) {
    auto t = corpus_trajectory(params, i);
    EXPECT_EQ(t.size(), params.dynamics.steps);
    EXPECT_GE(t.positions.minCoeff(), params.render.square / 2.0);
    EXPECT_LE(t.positions.maxCoeff(), params.render.canvas - params.render.square / 2.0);
  }
}

TEST(EndToEnd, RealLikeMoreVolatileThanItsClone) {
  CorpusParams params;
  int wins = 0;
  double real = 0, clone = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto t = corpus_trajectory(params, i);
    const double a = clip_sigma(t), b = clip_sigma(smooth_clone(t));
    wins += a > b ? 1 : 0;
    real += a;
    clone += b;
  }
  EXPECT_GE(wins, 18);
  EXPECT_GT(real, 2 * clone);
}

TEST(EndToEnd, MatchedFirstOrderStatistics) {
  CorpusParams params;
  double f1_real = 0, f1_fake = 0, s_real = 0, s_fake = 0;
  const int n = 100;
  for (int i = 0; i < n; ++i) {
    for (bool fake : {false, true}) {
      auto t = corpus_trajectory(params, (fake ? std::uint64_t{1} << 32 : 0) + i);
      if (fake) t = smooth_clone(t);
      FrameSequence seq;
      seq.frames = render_frames(t, params.render);
      auto f0 = encode(preprocess(seq), EncoderConfig{});
      const double f1 = first_order_l2(f0).values.mean();
      const double s = d3_score(f0, DistanceKind::L2).sigma;
      (fake ? f1_fake : f1_real) += f1 / n;
      (fake ? s_fake : s_real) += s / n;
    }
  }
  EXPECT_LE(std::abs(f1_real - f1_fake), 0.1 * std::max(f1_real, f1_fake));
  EXPECT_GE(s_real, 3.0 * s_fake);
}

}  // namespace
}  // namespace d3
