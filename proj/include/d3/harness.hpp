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

#ifndef D3_HARNESS_HPP
#define D3_HARNESS_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "d3/config.hpp"
#include "d3/error.hpp"
#include "d3/frames.hpp"
#include "d3/metrics.hpp"

namespace d3 {

struct ManifestEntry {
  std::string path;  // absolute, or relative to the manifest's directory once loaded
  int label = 0;     // 0 = real, 1 = generated
  std::string subset;
  std::string id;    // defaults to path
};

/// JSONL, one object per line with "path", "label", "subset" and optional
/// "id". Blank lines are ignored. Errors name the 1-based line.
std::vector<ManifestEntry> parse_manifest(std::istream& in,
                                          const std::filesystem::path& base_dir = {});
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

struct EntryIssue {
  std::string id;
  ErrorCode code;
  std::string message;
};

/// Accumulated wall time per stage, summed over workers.
struct StageTimings {
  double sample_s = 0.0;
  double preprocess_s = 0.0;
  double perturb_s = 0.0;
  double encode_s = 0.0;
  double score_s = 0.0;

  StageTimings& operator+=(const StageTimings& o);
};

/// Per-video traces for plotting; index k is 0-based frame position.
struct SeriesTrace {
  std::string id;
  Eigen::VectorXd f0_norm;  // length T
  Eigen::VectorXd f1;       // length T-1
  Eigen::VectorXd f2;       // length T-2
};

/// Sampled and preprocessed clips, reusable across perturbation runs.
struct ClipSet {
  std::vector<ManifestEntry> entries;
  std::vector<std::optional<FrameSequence>> clips;  // nullopt when unusable
  std::vector<EntryIssue> failures;
  std::vector<EntryIssue> skipped;
  StageTimings timings;
};

struct RunResult {
  std::vector<DetectionRecord> records;  // manifest order
  std::vector<EntryIssue> failures;
  std::vector<EntryIssue> skipped;
  StageTimings timings;
  std::vector<SeriesTrace> series;  // filled when requested
};

ClipSet load_clips(const std::vector<ManifestEntry>& entries, const RunConfig& cfg);

/// Perturb (cfg.perturbation), encode and score every usable clip.
RunResult score_clips(const ClipSet& clips, const RunConfig& cfg,
                      bool keep_series = false);

/// sample -> preprocess -> perturb -> encode -> score for each entry.
/// Per-entry problems are collected; config problems throw.
RunResult run_detection(const std::vector<ManifestEntry>& entries, const RunConfig& cfg,
                        bool keep_series = false);

EvalReport evaluate(const std::vector<DetectionRecord>& records,
                    const PoolOptions& pools = {});

SeriesTrace trace_series(const std::string& id, const EmbeddingSeries& f0,
                         DistanceKind kind);

void write_scores_csv(const std::vector<DetectionRecord>& records, std::ostream& out);
std::vector<DetectionRecord> read_scores_csv(const std::filesystem::path& path);
void write_series_csv(const std::vector<SeriesTrace>& traces, std::ostream& out);
nlohmann::json report_to_json(const EvalReport& report);

/// scores.csv, report.json and, when asked, series.csv under out_dir.
void emit_report(const EvalReport& report, const RunResult& result, const RunConfig& cfg,
                 const std::filesystem::path& out_dir, bool write_series = false);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace d3

#endif  // D3_HARNESS_HPP
