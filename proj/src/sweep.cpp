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

#include "d3/sweep.hpp"

#include <ostream>
#include <set>

namespace d3 {

SweepResult sweep(const std::vector<ManifestEntry>& entries, const RunConfig& cfg,
                  const std::vector<Perturbation>& grid) {
  for (const auto& p : grid) p.validate();
  RunConfig base = cfg;
  base.perturbation.reset();
  const ClipSet clips = load_clips(entries, base);
  const PoolOptions pools{cfg.real_pool_tag, cfg.per_subset_pools};

  SweepResult result;
  result.baseline = evaluate(score_clips(clips, base).records, pools);
  result.baseline.config_digest = config_digest(base);

  for (const auto& p : grid) {
    SweepPoint point;
    point.perturbation = p;
    RunConfig point_cfg = base;
    point_cfg.perturbation = p;
    try {
      const RunResult run = score_clips(clips, point_cfg);
      point.n_failures = run.failures.size() + clips.failures.size();
      point.report = evaluate(run.records, pools);
      point.report->config_digest = config_digest(point_cfg);
    } catch (const Error& e) {
      point.error = e.what();
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  std::set<std::string> subsets;
  for (const auto& [name, m] : result.baseline.per_subset) subsets.insert(name);
  for (const auto& p : result.points) {
    if (p.report) {
      for (const auto& [name, m] : p.report->per_subset) subsets.insert(name);
    }
  }
  out << "perturbation";
  for (const auto& s : subsets) out << ",ap:" << s;
  out << ",mAP,delta_mAP,error\n";
  for (const auto& p : result.points) {
    out << p.perturbation.label();
    for (const auto& s : subsets) {
      out << ',';
      if (p.report && p.report->per_subset.count(s)) {
        out << format_double(p.report->per_subset.at(s).ap);
      }
    }
    out << ',';
    if (p.report) {
      out << format_double(p.report->mean_ap) << ','
          << format_double(p.report->mean_ap - result.baseline.mean_ap);
    } else {
      out << ',';
    }
    std::string err = p.error;
    for (char& c : err) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << ',' << err << '\n';
  }
}

}  // namespace d3
