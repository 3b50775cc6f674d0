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

// d3: score, evaluate and stress-test videos with the second-order
// volatility detector.
//
//   d3 score  --manifest M [--config C] --out D [--series]
//   d3 eval   --scores D/scores.csv
//   d3 sweep  --manifest M [--config C] --blur-sigmas 0,1,2,3,4
//             --jpeg-qualities 100,90,80,70,60 --out D
//   d3 synth  --n-real 100 --n-fake 100 --seed 2024 --out DIR
//   d3 series --video V [--config C]
//
// Exit codes: 0 success, 1 configuration error, 2 partial failures.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "d3/config.hpp"
#include "d3/harness.hpp"
#include "d3/sweep.hpp"
#include "d3/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct SamplingFlags {
  std::optional<double> fps;
  std::optional<double> max_seconds;
  std::optional<int> max_frames;
  std::optional<unsigned> workers;
};

void add_sampling_flags(CLI::App* cmd, SamplingFlags& f) {
  cmd->add_option("--fps", f.fps, "Target sampling rate (frames per second)");
  cmd->add_option("--max-seconds", f.max_seconds, "Clip length read from t = 0");
  cmd->add_option("--max-frames", f.max_frames,
                  "Frame budget (default floor(fps * max-seconds))");
  cmd->add_option("--workers", f.workers, "Worker threads (D3_WORKERS overrides)");
}

d3::RunConfig resolve_config(const std::string& path, const SamplingFlags& f) {
  d3::RunConfig cfg = path.empty() ? d3::RunConfig{} : d3::load_run_config(path);
  auto& s = cfg.sampling;
  if (f.fps) s.target_fps = *f.fps;
  if (f.max_seconds) s.max_duration_s = *f.max_seconds;
  if (f.max_frames) {
    s.max_frames = *f.max_frames;
  } else if (f.fps || f.max_seconds) {
    s.max_frames = d3::SamplingPolicy::default_max_frames(s.target_fps, s.max_duration_s);
  }
  if (f.workers) cfg.workers = *f.workers;
  d3::apply_environment(cfg);
  cfg.validate();
  return cfg;
}

void report_issues(const d3::RunResult& run) {
  for (const auto& s : run.skipped) {
    std::cerr << "warning: skipped " << s.id << ": " << s.message << "\n";
  }
  for (const auto& f : run.failures) {
    std::cerr << "error: " << f.id << ": " << f.message << "\n";
  }
}

void print_report(const d3::EvalReport& report) {
  for (const auto& [name, m] : report.per_subset) {
    std::cout << name << "  AP " << m.ap << "  AUROC " << m.auroc << "  (" << m.n_pos
              << " generated / " << m.n_neg << " real)\n";
  }
  std::cout << "mAP " << report.mean_ap << "  mean AUROC " << report.mean_auroc << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free detector of generated video via second-order feature volatility"};
  app.require_subcommand(1);

  // score
  std::string manifest, config, out_dir;
  bool want_series = false, strict = false;
  SamplingFlags score_flags;
  auto* score = app.add_subcommand("score", "Score every manifest entry and evaluate");
  score->add_option("--manifest", manifest, "JSONL manifest")->required();
  score->add_option("--config", config, "Run configuration (JSON)");
  score->add_option("--out", out_dir, "Output directory")->required();
  score->add_flag("--series", want_series, "Also write per-video F0/F1/F2 traces");
  score->add_flag("--strict", strict, "Treat clips shorter than 4 frames as errors");
  add_sampling_flags(score, score_flags);

  // eval
  std::string scores_path, real_pool, eval_out;
  bool per_subset_pools = false;
  auto* eval = app.add_subcommand("eval", "Evaluate an existing scores.csv");
  eval->add_option("--scores", scores_path, "scores.csv from `d3 score`")->required();
  eval->add_option("--real-pool", real_pool, "Subset tag of the shared real pool");
  eval->add_flag("--per-subset-pools", per_subset_pools, "Pair each subset with its own reals");
  eval->add_option("--out", eval_out, "Write the report JSON here");

  // sweep
  std::vector<double> blur_sigmas;
  std::vector<int> jpeg_qualities;
  SamplingFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "Robustness sweep over blur / JPEG levels");
  sweep_cmd->add_option("--manifest", manifest, "JSONL manifest")->required();
  sweep_cmd->add_option("--config", config, "Run configuration (JSON)");
  sweep_cmd->add_option("--blur-sigmas", blur_sigmas, "Gaussian blur sigmas")->delimiter(',');
  sweep_cmd->add_option("--jpeg-qualities", jpeg_qualities, "JPEG qualities")->delimiter(',');
  sweep_cmd->add_option("--out", out_dir, "Directory for sweep.csv")->required();
  add_sampling_flags(sweep_cmd, sweep_flags);

  // synth
  int n_real = 100, n_fake = 100;
  d3::CorpusParams corpus;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic real-like / smooth corpus");
  synth->add_option("--n-real", n_real, "Real-like clips")->capture_default_str();
  synth->add_option("--n-fake", n_fake, "Smooth clones")->capture_default_str();
  synth->add_option("--seed", corpus.seed, "Base seed")->capture_default_str();
  synth->add_option("--steps", corpus.dynamics.steps, "Frames per clip")->capture_default_str();
  synth->add_option("--out", out_dir, "Output directory")->required();

  // series
  std::string video;
  SamplingFlags series_flags;
  auto* series = app.add_subcommand("series", "Emit F0-norm / F1 / F2 traces for one video");
  series->add_option("--video", video, "Video file or frame directory")->required();
  series->add_option("--config", config, "Run configuration (JSON)");
  series->add_option("--out", out_dir, "CSV file (default stdout)");
  add_sampling_flags(series, series_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score) {
      d3::RunConfig cfg = resolve_config(config, score_flags);
      if (strict) cfg.skip_short_videos = false;
      const auto entries = d3::load_manifest(manifest);
      const auto run = d3::run_detection(entries, cfg, want_series);
      report_issues(run);
      d3::EvalReport report;
      try {
        report = d3::evaluate(run.records, {cfg.real_pool_tag, cfg.per_subset_pools});
      } catch (const d3::Error& e) {
        std::cerr << "warning: " << e.what() << "\n";
      }
      report.config_digest = d3::config_digest(cfg);
      d3::emit_report(report, run, cfg, out_dir, want_series);
      print_report(report);
      return run.failures.empty() ? kExitOk : kExitPartial;
    }
    if (*eval) {
      const auto records = d3::read_scores_csv(scores_path);
      const auto report = d3::evaluate(records, {real_pool, per_subset_pools});
      const auto j = d3::report_to_json(report);
      if (!eval_out.empty()) {
        std::ofstream(eval_out) << j.dump(2) << "\n";
      }
      print_report(report);
      return kExitOk;
    }
    if (*sweep_cmd) {
      const d3::RunConfig cfg = resolve_config(config, sweep_flags);
      auto grid = (blur_sigmas.empty() && jpeg_qualities.empty())
                      ? d3::standard_grid()
                      : d3::make_grid(blur_sigmas, jpeg_qualities);
      const auto entries = d3::load_manifest(manifest);
      const auto result = d3::sweep(entries, cfg, grid);
      std::filesystem::create_directories(out_dir);
      std::ofstream csv(std::filesystem::path(out_dir) / "sweep.csv");
      d3::write_sweep_csv(result, csv);
      d3::write_sweep_csv(result, std::cout);
      bool partial = false;
      for (const auto& p : result.points) partial |= !p.error.empty() || p.n_failures > 0;
      return partial ? kExitPartial : kExitOk;
    }
    if (*synth) {
      const auto path = d3::make_corpus(n_real, n_fake, corpus, out_dir);
      std::cout << path.string() << "\n";
      return kExitOk;
    }
    if (*series) {
      const d3::RunConfig cfg = resolve_config(config, series_flags);
      const auto clip = d3::preprocess(d3::sample_frames(video, cfg.sampling));
      const auto encoded = d3::encode(clip, cfg.encoder);
      const d3::EmbeddingSeries f0(encoded.vectors(), cfg.dt);
      const auto trace = d3::trace_series(video, f0, cfg.distance);
      if (out_dir.empty()) {
        d3::write_series_csv({trace}, std::cout);
      } else {
        std::ofstream out(out_dir);
        d3::write_series_csv({trace}, out);
      }
      return kExitOk;
    }
  } catch (const d3::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case d3::ErrorCode::ConfigError:
      case d3::ErrorCode::ManifestError:
      case d3::ErrorCode::ModelError:
        return kExitConfig;
      default:
        return kExitPartial;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
