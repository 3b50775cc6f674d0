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

#include "d3/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "d3/error.hpp"

namespace d3 {
namespace {

void check_finite(std::span<const ScoredLabel> items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!std::isfinite(items[i].score)) {
      throw Error(ErrorCode::UndefinedMetric,
                  "score " + std::to_string(i) + " is not finite", i);
    }
  }
}

std::vector<std::size_t> order_by_score(std::span<const ScoredLabel> items,
                                        bool descending) {
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? items[a].score > items[b].score
                      : items[a].score < items[b].score;
  });
  return idx;
}

}  // namespace

double average_precision(std::span<const ScoredLabel> items) {
  check_finite(items);
  const auto n_pos = static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(),
                    [](const ScoredLabel& s) { return s.positive; }));
  if (n_pos == 0) {
    throw Error(ErrorCode::UndefinedMetric, "average precision needs a positive item");
  }
  const auto idx = order_by_score(items, /*descending=*/true);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const double score = items[idx[i]].score;
    for (; i < idx.size() && items[idx[i]].score == score; ++i) {
      items[idx[i]].positive ? ++tp : ++fp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision =
        static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

double auroc(std::span<const ScoredLabel> items) {
  check_finite(items);
  std::size_t n_pos = 0;
  for (const auto& s : items) n_pos += s.positive ? 1 : 0;
  const std::size_t n_neg = items.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::UndefinedMetric, "AUROC needs both classes");
  }
  // Sum of positive mid-ranks (1-based).
  const auto idx = order_by_score(items, /*descending=*/false);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::size_t pos_in_block = 0;
    for (; j < idx.size() && items[idx[j]].score == items[idx[i]].score; ++j) {
      pos_in_block += items[idx[j]].positive ? 1 : 0;
    }
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    rank_sum += mid_rank * static_cast<double>(pos_in_block);
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

EvalReport evaluate_subsets(std::span<const DetectionRecord> records,
                            const PoolOptions& pools) {
  std::set<std::string> generated;
  for (const auto& r : records) {
    if (r.label != 0 && r.label != 1) {
      throw Error(ErrorCode::UndefinedMetric,
                  "record " + r.id + " has non-binary label " + std::to_string(r.label));
    }
    if (r.label == 1) generated.insert(r.subset);
  }
  if (generated.empty()) {
    throw Error(ErrorCode::UndefinedMetric, "no generated records to evaluate");
  }

  auto in_pool = [&](const DetectionRecord& r, const std::string& subset) {
    if (r.label != 0) return false;
    if (pools.per_subset_pools) return r.subset == subset;
    return pools.real_pool_tag.empty() || r.subset == pools.real_pool_tag;
  };

  EvalReport report;
  for (const auto& subset : generated) {
    std::vector<ScoredLabel> items;
    SubsetMetrics m;
    for (const auto& r : records) {
      if (r.label == 1 && r.subset == subset) {
        items.push_back({r.fake_score, true, r.subset});
        ++m.n_pos;
      } else if (in_pool(r, subset)) {
        items.push_back({r.fake_score, false, r.subset});
        ++m.n_neg;
      }
    }
    if (m.n_neg == 0) {
      throw Error(ErrorCode::UndefinedMetric,
                  "real pool is empty for subset '" + subset + "'");
    }
    m.ap = average_precision(items);
    m.auroc = auroc(items);
    report.per_subset.emplace(subset, m);
  }
  double ap_sum = 0.0, auc_sum = 0.0;
  for (const auto& [name, m] : report.per_subset) {
    ap_sum += m.ap;
    auc_sum += m.auroc;
  }
  const auto n = static_cast<double>(report.per_subset.size());
  report.mean_ap = ap_sum / n;
  report.mean_auroc = auc_sum / n;
  return report;
}

}  // namespace d3
