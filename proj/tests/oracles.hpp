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

#ifndef D3_TESTS_ORACLES_HPP
#define D3_TESTS_ORACLES_HPP

// Plain-loop reference implementations. Deliberately written without Eigen
// expressions so they share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <vector>

namespace d3::oracle {

using Rows = std::vector<std::vector<double>>;

inline std::vector<double> f1_l2(const Rows& x, double dt) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x[k].size(); ++j) {
      const double d = x[k + 1][j] - x[k][j];
      acc += d * d;
    }
    out.push_back(std::sqrt(acc) / dt);
  }
  return out;
}

inline std::vector<double> f1_cosine(const Rows& x, double dt) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < x[k].size(); ++j) {
      dot += x[k][j] * x[k + 1][j];
      na += x[k][j] * x[k][j];
      nb += x[k + 1][j] * x[k + 1][j];
    }
    out.push_back(dot / (std::sqrt(na) * std::sqrt(nb)) / dt);
  }
  return out;
}

inline std::vector<double> diff(const std::vector<double>& f, double dt) {
  std::vector<double> out;
  for (std::size_t k = 1; k < f.size(); ++k) out.push_back((f[k] - f[k - 1]) / dt);
  return out;
}

inline double sample_std(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct Item {
  double score;
  bool positive;
};

// Walk distinct thresholds from high to low, counting the prefix directly.
inline double average_precision(const std::vector<Item>& items) {
  std::set<double, std::greater<>> thresholds;
  std::size_t n_pos = 0;
  for (const auto& it : items) {
    thresholds.insert(it.score);
    n_pos += it.positive ? 1 : 0;
  }
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    std::size_t tp = 0, taken = 0;
    for (const auto& it : items) {
      if (it.score >= t) {
        ++taken;
        tp += it.positive ? 1 : 0;
      }
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(taken);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

// Probability that a positive outranks a negative, ties counting one half.
inline double auroc(const std::vector<Item>& items) {
  double wins = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& p : items) {
    if (!p.positive) {
      ++n_neg;
      continue;
    }
    ++n_pos;
    for (const auto& n : items) {
      if (n.positive) continue;
      if (p.score > n.score) wins += 1.0;
      else if (p.score == n.score) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Calls fn(items) for every multiset of (score, label) pairs with 1..max_size
// elements, scores taken from `grid`.
template <typename Fn>
void for_each_multiset(std::size_t max_size, const std::vector<double>& grid, Fn&& fn) {
  const std::size_t kinds = grid.size() * 2;
  std::vector<std::size_t> pick;
  auto emit = [&] {
    std::vector<Item> items;
    for (std::size_t k : pick) items.push_back({grid[k / 2], k % 2 == 1});
    fn(items);
  };
  // Non-decreasing sequences of kind indices enumerate multisets once each.
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (!pick.empty()) emit();
    if (pick.size() == max_size) return;
    for (std::size_t k = start; k < kinds; ++k) {
      pick.push_back(k);
      self(self, k);
      pick.pop_back();
    }
  };
  rec(rec, 0);
}

// Normalized Gaussian weights on [-r, r], r = ceil(3 sigma).
inline std::vector<double> gaussian_weights(double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w;
  double total = 0.0;
  for (int i = -r; i <= r; ++i) {
    w.push_back(std::exp(-0.5 * i * i / (sigma * sigma)));
    total += w.back();
  }
  for (double& v : w) v /= total;
  return w;
}

// Relative agreement; `scale` covers differences of large operands that
// cancel to near zero.
inline bool close_rel(double a, double b, double rel, double scale = 0.0) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), scale});
}

}  // namespace d3::oracle

#endif  // D3_TESTS_ORACLES_HPP
