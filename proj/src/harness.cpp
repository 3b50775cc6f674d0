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

#include "d3/harness.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "d3/encoder.hpp"
#include "d3/parallel.hpp"
#include "d3/robustness.hpp"

namespace d3 {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

json issues_to_json(const std::vector<EntryIssue>& issues) {
  json arr = json::array();
  for (const auto& i : issues) {
    arr.push_back({{"id", i.id}, {"code", std::string(to_string(i.code))}, {"message", i.message}});
  }
  return arr;
}

// Collects per-index issues into manifest order.
std::vector<EntryIssue> flatten(std::vector<std::optional<EntryIssue>>& slots) {
  std::vector<EntryIssue> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

}  // namespace

StageTimings& StageTimings::operator+=(const StageTimings& o) {
  sample_s += o.sample_s;
  preprocess_s += o.preprocess_s;
  perturb_s += o.perturb_s;
  encode_s += o.encode_s;
  score_s += o.score_s;
  return *this;
}

std::vector<ManifestEntry> parse_manifest(std::istream& in, const fs::path& base_dir) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ManifestError, "line " + std::to_string(line_no) + ": " + what,
                line_no);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(std::string("parse error: ") + e.what());
    }
    if (!j.is_object()) fail("expected a JSON object");
    for (const char* key : {"path", "label", "subset"}) {
      if (!j.contains(key)) fail(std::string("missing field \"") + key + "\"");
    }
    ManifestEntry e;
    try {
      e.path = j.at("path").get<std::string>();
      e.label = j.at("label").get<int>();
      e.subset = j.at("subset").get<std::string>();
      e.id = j.contains("id") ? j.at("id").get<std::string>() : e.path;
    } catch (const json::exception& ex) {
      fail(std::string("bad field type: ") + ex.what());
    }
    if (e.label != 0 && e.label != 1) fail("field \"label\" must be 0 or 1");
    if (e.subset.empty()) fail("field \"subset\" must be non-empty");
    if (e.path.empty()) fail("field \"path\" must be non-empty");
    if (!ids.insert(e.id).second) fail("duplicate id \"" + e.id + "\"");
    if (!base_dir.empty() && fs::path(e.path).is_relative()) {
      e.path = (base_dir / e.path).lexically_normal().string();
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ManifestError, "cannot read manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

ClipSet load_clips(const std::vector<ManifestEntry>& entries, const RunConfig& cfg) {
  cfg.validate();
  ClipSet set;
  set.entries = entries;
  set.clips.resize(entries.size());
  std::vector<std::optional<EntryIssue>> failures(entries.size()), skipped(entries.size());
  std::vector<StageTimings> timings(std::max(1u, cfg.workers));
  const auto required = static_cast<std::size_t>(min_frames(cfg.order));

  parallel_for(entries.size(), cfg.workers, [&](unsigned w, std::size_t i) {
    const auto& e = entries[i];
    try {
      auto t0 = Clock::now();
      FrameSequence raw = sample_frames(e.path, cfg.sampling);
      timings[w].sample_s += seconds_since(t0);
      if (raw.size() < required) {
        const std::string msg = "sampled " + std::to_string(raw.size()) +
                                " frames, need at least " + std::to_string(required);
        if (cfg.skip_short_videos) {
          skipped[i] = EntryIssue{e.id, ErrorCode::TooFewFrames, msg};
        } else {
          failures[i] = EntryIssue{e.id, ErrorCode::TooFewFrames, msg};
        }
        return;
      }
      t0 = Clock::now();
      set.clips[i] = preprocess(raw);
      timings[w].preprocess_s += seconds_since(t0);
    } catch (const Error& err) {
      failures[i] = EntryIssue{e.id, err.code(), err.what()};
    }
  });
  set.failures = flatten(failures);
  set.skipped = flatten(skipped);
  for (const auto& t : timings) set.timings += t;
  return set;
}

RunResult score_clips(const ClipSet& set, const RunConfig& cfg, bool keep_series) {
  cfg.validate();
  const std::size_t n = set.entries.size();
  std::vector<std::optional<DetectionRecord>> records(n);
  std::vector<std::optional<SeriesTrace>> traces(n);
  std::vector<std::optional<EntryIssue>> failures(n);
  std::vector<StageTimings> timings(std::max(1u, cfg.workers));
  std::vector<std::unique_ptr<FrameEncoder>> encoders(std::max(1u, cfg.workers));

  parallel_for(n, cfg.workers, [&](unsigned w, std::size_t i) {
    if (!set.clips[i]) return;
    if (!encoders[w]) encoders[w] = make_encoder(cfg.encoder);
    const auto& e = set.entries[i];
    const FrameSequence& clip = *set.clips[i];
    try {
      auto t0 = Clock::now();
      FrameSequence perturbed;
      const FrameSequence* input = &clip;
      if (cfg.perturbation && cfg.perturbation->kind != PerturbationKind::Identity) {
        perturbed.source_fps = clip.source_fps;
        perturbed.sample_dt = clip.sample_dt;
        perturbed.source_indices = clip.source_indices;
        for (const auto& f : clip.frames) perturbed.frames.push_back(apply(f, *cfg.perturbation));
        input = &perturbed;
      }
      timings[w].perturb_s += seconds_since(t0);

      t0 = Clock::now();
      const EmbeddingSeries encoded = encode(*input, *encoders[w]);
      const EmbeddingSeries f0(encoded.vectors(), cfg.dt);
      timings[w].encode_s += seconds_since(t0);

      t0 = Clock::now();
      const DetectionScore score = d3_score(f0, cfg.distance, cfg.order);
      timings[w].score_s += seconds_since(t0);

      records[i] = DetectionRecord{e.id, e.subset, e.label, score.sigma, score.fake_score};
      if (keep_series) traces[i] = trace_series(e.id, f0, cfg.distance);
    } catch (const Error& err) {
      failures[i] = EntryIssue{e.id, err.code(), err.what()};
    }
  });

  RunResult result;
  for (auto& r : records) {
    if (r) result.records.push_back(std::move(*r));
  }
  for (auto& t : traces) {
    if (t) result.series.push_back(std::move(*t));
  }
  // Loading and scoring failures, merged in manifest order.
  std::vector<std::optional<EntryIssue>> merged(n);
  std::size_t next_load = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) {
      merged[i] = failures[i];
    } else if (next_load < set.failures.size() &&
               set.failures[next_load].id == set.entries[i].id) {
      merged[i] = set.failures[next_load++];
    }
  }
  result.failures = flatten(merged);
  result.skipped = set.skipped;
  result.timings = set.timings;
  for (const auto& t : timings) result.timings += t;
  return result;
}

RunResult run_detection(const std::vector<ManifestEntry>& entries, const RunConfig& cfg,
                        bool keep_series) {
  return score_clips(load_clips(entries, cfg), cfg, keep_series);
}

EvalReport evaluate(const std::vector<DetectionRecord>& records, const PoolOptions& pools) {
  return evaluate_subsets(records, pools);
}

SeriesTrace trace_series(const std::string& id, const EmbeddingSeries& f0, DistanceKind kind) {
  SeriesTrace t;
  t.id = id;
  t.f0_norm = f0.vectors().rowwise().norm();
  if (f0.frames() >= 2) {
    const ScalarSeries f1 = first_order(f0, kind);
    t.f1 = f1.values;
    if (f1.size() >= 2) t.f2 = second_order_diff(f1).values;
  }
  return t;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_scores_csv(const std::vector<DetectionRecord>& records, std::ostream& out) {
  out << "id,subset,label,sigma,fake_score\n";
  for (const auto& r : records) {
    out << csv_field(r.id) << ',' << csv_field(r.subset) << ',' << r.label << ','
        << format_double(r.sigma) << ',' << format_double(r.fake_score) << '\n';
  }
}

std::vector<DetectionRecord> read_scores_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, path.string() + " is empty");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorCode::IoError, path.string() + ": missing column " + name);
  };
  const std::size_t c_id = column("id"), c_subset = column("subset"),
                    c_label = column("label"), c_sigma = column("sigma"),
                    c_fake = column("fake_score");
  auto number = [&](const std::string& s, std::size_t line_no, auto& value) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw Error(ErrorCode::IoError,
                  path.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'",
                  line_no);
    }
  };
  std::vector<DetectionRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw Error(ErrorCode::IoError,
                  path.string() + ":" + std::to_string(line_no) + ": wrong field count",
                  line_no);
    }
    DetectionRecord r;
    r.id = f[c_id];
    r.subset = f[c_subset];
    number(f[c_label], line_no, r.label);
    number(f[c_sigma], line_no, r.sigma);
    number(f[c_fake], line_no, r.fake_score);
    records.push_back(std::move(r));
  }
  return records;
}

void write_series_csv(const std::vector<SeriesTrace>& traces, std::ostream& out) {
  out << "id,k,f0_norm,f1,f2\n";
  for (const auto& t : traces) {
    for (Index k = 0; k < t.f0_norm.size(); ++k) {
      out << csv_field(t.id) << ',' << k << ',' << format_double(t.f0_norm(k)) << ',';
      if (k < t.f1.size()) out << format_double(t.f1(k));
      out << ',';
      // f2[j] = (f1[j+1] - f1[j]) / dt sits at the frame shared by both steps.
      if (k >= 1 && k - 1 < t.f2.size()) out << format_double(t.f2(k - 1));
      out << '\n';
    }
  }
}

json report_to_json(const EvalReport& report) {
  json subsets = json::object();
  for (const auto& [name, m] : report.per_subset) {
    subsets[name] = {{"ap", m.ap}, {"auroc", m.auroc}, {"n_pos", m.n_pos}, {"n_neg", m.n_neg}};
  }
  return {{"per_subset", subsets},
          {"mAP", report.mean_ap},
          {"mean_auroc", report.mean_auroc},
          {"config_digest", report.config_digest}};
}

void emit_report(const EvalReport& report, const RunResult& result, const RunConfig& cfg,
                 const fs::path& out_dir, bool write_series) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  auto open = [&](const char* name) {
    std::ofstream f(out_dir / name, std::ios::trunc | std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + (out_dir / name).string());
    return f;
  };
  {
    auto f = open("scores.csv");
    write_scores_csv(result.records, f);
  }
  {
    json j = report_to_json(report);
    j["config"] = run_config_to_json(cfg);
    j["config_digest"] = report.config_digest.empty() ? config_digest(cfg) : report.config_digest;
    const std::string model = model_hash(cfg);
    if (!model.empty()) j["model_sha256"] = model;
    j["n_records"] = result.records.size();
    j["skipped"] = issues_to_json(result.skipped);
    j["failures"] = issues_to_json(result.failures);
    j["timings_s"] = {{"sample", result.timings.sample_s},
                      {"preprocess", result.timings.preprocess_s},
                      {"perturb", result.timings.perturb_s},
                      {"encode", result.timings.encode_s},
                      {"score", result.timings.score_s}};
    j["baseline_columns"] = json::object();  // externally computed baselines go here
    auto f = open("report.json");
    f << j.dump(2) << '\n';
  }
  if (write_series) {
    auto f = open("series.csv");
    write_series_csv(result.series, f);
  }
}

}  // namespace d3
