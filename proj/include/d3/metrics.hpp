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

#ifndef D3_METRICS_HPP
#define D3_METRICS_HPP

// Threshold-free ranking metrics. Positive class = generated video; higher
// scores mean "more likely generated".

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace d3 {

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
  std::string subset;
};

/// Step-wise AP over the descending-score ranking, sum of (R_k - R_{k-1}) P_k.
/// Items sharing a score form one block: the block is admitted as a whole
/// and its precision is taken at the block end.
/// Throws UndefinedMetric when there is no positive.
double average_precision(std::span<const ScoredLabel> items);

/// Mann-Whitney form: P(pos > neg) + 0.5 P(pos == neg).
/// Throws UndefinedMetric unless both classes are present.
double auroc(std::span<const ScoredLabel> items);

struct DetectionRecord {
  std::string id;
  std::string subset;
  int label = 0;  // 0 = real, 1 = generated
  double sigma = 0.0;
  double fake_score = 0.0;
};

struct SubsetMetrics {
  double ap = 0.0;
  double auroc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

struct EvalReport {
  std::map<std::string, SubsetMetrics> per_subset;
  double mean_ap = 0.0;
  double mean_auroc = 0.0;
  std::string config_digest;
};

struct PoolOptions {
  /// Real records (label 0) whose subset equals this tag form the negative
  /// pool; empty means every real record.
  std::string real_pool_tag;
  /// Score each generated subset against the real records of the same subset.
  bool per_subset_pools = false;
};

/// One row per subset holding generated records: that subset's generated
/// clips as positives against the real pool as negatives. mAP is the
/// unweighted mean over rows.
EvalReport evaluate_subsets(std::span<const DetectionRecord> records,
                            const PoolOptions& pools = {});

}  // namespace d3

#endif  // D3_METRICS_HPP
