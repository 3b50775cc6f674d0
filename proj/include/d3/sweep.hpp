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

#ifndef D3_SWEEP_HPP
#define D3_SWEEP_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "d3/harness.hpp"
#include "d3/robustness.hpp"

namespace d3 {

struct SweepPoint {
  Perturbation perturbation;
  std::optional<EvalReport> report;
  std::size_t n_failures = 0;
  std::string error;  // set when the point could not be evaluated
};

struct SweepResult {
  EvalReport baseline;  // unperturbed
  std::vector<SweepPoint> points;
};

/// Samples and preprocesses every clip once, then perturbs, encodes and
/// scores per grid point. A failing point is recorded and the rest continue.
SweepResult sweep(const std::vector<ManifestEntry>& entries, const RunConfig& cfg,
                  const std::vector<Perturbation>& grid);

/// perturbation,ap:<subset>...,mAP,delta_mAP,error  (delta vs. unperturbed)
void write_sweep_csv(const SweepResult& result, std::ostream& out);

}  // namespace d3

#endif  // D3_SWEEP_HPP
