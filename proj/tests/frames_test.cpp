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

#include "d3/frames.hpp"

#include <gtest/gtest.h>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include <cmath>
#include <fstream>
#include <vector>

#include "d3/error.hpp"
#include "test_util.hpp"

namespace d3 {
namespace {

namespace fs = std::filesystem;

std::vector<double> stamps(int n, double fps) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = i / fps;
  return t;
}

TEST(SamplingPolicy, DefaultMaxFrames) {
  SamplingPolicy p;
  EXPECT_EQ(p.max_frames, SamplingPolicy::default_max_frames(8, 2));
  EXPECT_EQ(SamplingPolicy::default_max_frames(8, 2), 16);
  EXPECT_EQ(SamplingPolicy::default_max_frames(10, 0.3), 3);
}

TEST(SamplingPolicy, RejectsBadValues) {
  SamplingPolicy p;
  p.target_fps = 0;
  EXPECT_THROW(p.validate(), Error);
  p = {};
  p.max_frames = 0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(SelectIndices, ThirtyFpsThreeSeconds) {
  auto t = stamps(90, 30.0);
  auto idx = select_sample_indices(t, 3.0, SamplingPolicy{});
  ASSERT_EQ(idx.size(), 16u);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double target = k * 0.125;
    // Nearest source frame to the target time.
    EXPECT_LE(std::abs(t[idx[k]] - target), 0.5 / 30.0 + 1e-12) << k;
  }
  EXPECT_EQ(idx[1], 4u);   // 0.125 s * 30 = 3.75
  EXPECT_EQ(idx[15], 56u); // 1.875 s * 30 = 56.25
}

TEST(SelectIndices, ShortSourceReturnsEverything) {
  auto idx = select_sample_indices(stamps(8, 8.0), 1.0, SamplingPolicy{});
  EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(SelectIndices, TieGoesToEarlierFrame) {
  // Source at 16 fps sampled at 8 fps lands exactly on frames; at 4 fps
  // sampled at 8 fps the odd targets fall between two frames.
  SamplingPolicy p;
  p.target_fps = 8;
  auto idx = select_sample_indices(stamps(40, 16.0), 10.0, p);
  EXPECT_EQ(idx[1], 2u);
  auto t = std::vector<double>{0.0, 0.25, 0.5};
  p.max_duration_s = 10;
  auto half = select_sample_indices(t, 0.75, p);
  EXPECT_EQ(half, (std::vector<std::size_t>{0, 0, 1, 1, 2, 2}));
}

TEST(SelectIndices, OrderPreserved) {
  auto t = stamps(200, 23.976);
  SamplingPolicy p;
  p.max_frames = 64;
  p.max_duration_s = 8;
  auto idx = select_sample_indices(t, 200 / 23.976, p);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_EQ(idx.size(), 64u);
}

TEST(Crop, LongerEdgeOnly) {
  cv::Mat wide(500, 1000, CV_8UC3, cv::Scalar(1, 2, 3));
  auto c = crop_longer_edge(wide);
  EXPECT_EQ(c.cols, 900);
  EXPECT_EQ(c.rows, 500);
  cv::Mat tall(1000, 500, CV_8UC3);
  auto t = crop_longer_edge(tall);
  EXPECT_EQ(t.rows, 900);
  EXPECT_EQ(t.cols, 500);
}

TEST(Crop, Centered) {
  cv::Mat m(10, 20, CV_8UC1);
  for (int c = 0; c < 20; ++c) m.col(c).setTo(c);
  auto out = crop_longer_edge(m);
  ASSERT_EQ(out.cols, 18);
  EXPECT_EQ(out.at<uchar>(0, 0), 1);
  EXPECT_EQ(out.at<uchar>(0, 17), 18);
}

TEST(Crop, TooSmall) {
  cv::Mat m(1, 3, CV_8UC3);
  try {
    preprocess_frame(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FrameTooSmall);
  }
}

TEST(Preprocess, SolidColorSurvives) {
  cv::Mat m(224, 224, CV_8UC3, cv::Scalar(40, 120, 200));
  auto out = preprocess_frame(m);
  cv::Mat diff;
  cv::absdiff(out, m, diff);
  double max_dev = 0;
  cv::minMaxLoc(diff.reshape(1), nullptr, &max_dev);
  EXPECT_LE(max_dev, 2.0);
}

TEST(Preprocess, ShapeContract) {
  cv::Mat board(448, 448, CV_8UC3);
  for (int r = 0; r < 448; ++r)
    for (int c = 0; c < 448; ++c)
      board.at<cv::Vec3b>(r, c) = ((r / 32 + c / 32) % 2) ? cv::Vec3b(255, 255, 255)
                                                         : cv::Vec3b(0, 0, 0);
  for (const auto& in : {board, cv::Mat(31, 77, CV_8UC3, cv::Scalar::all(9))}) {
    auto out = preprocess_frame(in);
    EXPECT_EQ(out.rows, kFrameSize);
    EXPECT_EQ(out.cols, kFrameSize);
    EXPECT_EQ(out.channels(), 3);
    EXPECT_EQ(out.depth(), CV_8U);
  }
}

TEST(Preprocess, Deterministic) {
  cv::Mat m(300, 400, CV_8UC3);
  cv::randu(m, 0, 255);
  auto a = preprocess_frame(m);
  auto b = preprocess_frame(m);
  EXPECT_EQ(cv::norm(a, b, cv::NORM_INF), 0.0);
}

TEST(Jpeg, RejectsBadQuality) {
  cv::Mat m(8, 8, CV_8UC3);
  EXPECT_THROW(jpeg_roundtrip(m, 0), Error);
  EXPECT_THROW(jpeg_roundtrip(m, 101), Error);
}

TEST(FrameFiles, NaturalOrder) {
  auto dir = d3::testing::scratch_dir("frames");
  cv::Mat m(4, 4, CV_8UC3, cv::Scalar::all(0));
  for (const char* name : {"f10.png", "f2.png", "f1.png", "notes.txt"}) {
    std::ofstream(dir / name) << "";
    if (fs::path(name).extension() == ".png") cv::imwrite((dir / name).string(), m);
  }
  auto files = list_frame_files(dir);
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[0].filename(), "f1.png");
  EXPECT_EQ(files[1].filename(), "f2.png");
  EXPECT_EQ(files[2].filename(), "f10.png");
}

void write_counter_dir(const fs::path& dir, int n, double fps) {
  for (int i = 0; i < n; ++i) {
    cv::Mat m(40, 60, CV_8UC3, cv::Scalar::all(i * 5));
    cv::imwrite((dir / ("frame_" + std::to_string(i) + ".png")).string(), m);
  }
  std::ofstream(dir / "meta.json") << "{\"fps\": " << fps << "}";
}

int burned_index(const cv::Mat& m) {
  return static_cast<int>(std::lround(cv::mean(m)[0] / 5.0));
}

TEST(SampleFrames, DirectoryUsesSidecarRate) {
  auto dir = d3::testing::scratch_dir("counter");
  write_counter_dir(dir, 48, 24.0);
  auto seq = sample_frames(dir, SamplingPolicy{});
  ASSERT_EQ(seq.size(), 16u);
  EXPECT_EQ(seq.source_fps, 24.0);
  EXPECT_EQ(seq.sample_dt, 1.0);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    EXPECT_EQ(burned_index(seq.frames[k]), static_cast<int>(3 * k));
    EXPECT_EQ(seq.source_indices[k], 3 * k);
  }
}

TEST(SampleFrames, DirectoryWithoutSidecarIsTargetRate) {
  auto dir = d3::testing::scratch_dir("plain");
  write_counter_dir(dir, 5, 8.0);
  fs::remove(dir / "meta.json");
  auto seq = sample_frames(dir, SamplingPolicy{});
  ASSERT_EQ(seq.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_EQ(burned_index(seq.frames[k]), int(k));
}

TEST(SampleFrames, Errors) {
  auto dir = d3::testing::scratch_dir("empty");
  try {
    sample_frames(dir, SamplingPolicy{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySource);
  }
  std::ofstream(dir / "junk.mp4") << "not a video";
  try {
    sample_frames(dir / "junk.mp4", SamplingPolicy{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DecodeError);
  }
  EXPECT_THROW(sample_frames(dir / "missing", SamplingPolicy{}), Error);
}

TEST(SampleFrames, CounterVideo) {
  auto dir = d3::testing::scratch_dir("video");
  const auto path = dir / "counter.avi";
  {
    cv::VideoWriter w(path.string(), cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), 24.0,
                      cv::Size(64, 48));
    if (!w.isOpened()) GTEST_SKIP() << "no MJPG writer available";
    for (int i = 0; i < 72; ++i) w.write(cv::Mat(48, 64, CV_8UC3, cv::Scalar::all(i * 3)));
  }
  auto seq = sample_frames(path, SamplingPolicy{});
  ASSERT_EQ(seq.size(), 16u);
  EXPECT_NEAR(seq.source_fps, 24.0, 1e-6);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const int idx = static_cast<int>(std::lround(cv::mean(seq.frames[k])[0] / 3.0));
    EXPECT_EQ(idx, static_cast<int>(3 * k)) << k;
  }
  auto pre = preprocess(seq);
  EXPECT_EQ(pre.size(), 16u);
  EXPECT_EQ(pre.frames[0].size(), cv::Size(kFrameSize, kFrameSize));
}

TEST(SampleFrames, ThirtyFpsVideoGivesSixteen) {
  auto dir = d3::testing::scratch_dir("video30");
  const auto path = dir / "clip.avi";
  {
    cv::VideoWriter w(path.string(), cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), 30.0,
                      cv::Size(32, 32));
    if (!w.isOpened()) GTEST_SKIP() << "no MJPG writer available";
    for (int i = 0; i < 90; ++i) w.write(cv::Mat(32, 32, CV_8UC3, cv::Scalar::all(i * 2)));
  }
  auto seq = sample_frames(path, SamplingPolicy{});
  ASSERT_EQ(seq.size(), 16u);
  EXPECT_EQ(seq.source_indices.back(), 56u);
}

}  // namespace
}  // namespace d3
