// Copyright 2026 The vemorph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VEMORPH_HARNESS_HPP_
#define VEMORPH_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vemorph/backends/client.hpp"
#include "vemorph/hypothesis.hpp"
#include "vemorph/label.hpp"
#include "vemorph/mr_engine.hpp"
#include "vemorph/workflow.hpp"

namespace vemorph {

namespace fs = std::filesystem;

// ---- dataset ---------------------------------------------------------------

struct DatasetRecord {
  std::string id;
  // Relative to the dataset's image directory.
  std::string image;
  std::string hypothesis;
  Label label = Label::kEntailment;

  bool operator==(const DatasetRecord&) const = default;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct Dataset {
  fs::path image_dir;
  std::vector<DatasetRecord> records;
  std::vector<LineError> rejected;
  // Non-blank manifest lines.
  std::size_t lines = 0;
};

inline constexpr double kDefaultMaxBadLineRatio = 0.1;

// Reads a JSON-Lines manifest of {id, image, hypothesis, label}. Bad lines are
// collected in `rejected`; more than `max_bad_ratio` of them throws
// Error(kValidation). An unreadable manifest throws Error(kManifestUnreadable).
Dataset load_dataset(const fs::path& manifest, const fs::path& image_dir,
                     double max_bad_ratio = kDefaultMaxBadLineRatio);

// ---- configuration ---------------------------------------------------------

struct RunConfig {
  fs::path dataset;
  // Defaults to the manifest's directory.
  fs::path image_dir;
  fs::path output_dir = "vemorph-out";
  // Every role the run uses. A missing synonym role means identity.
  std::map<backends::Role, backends::BackendEndpoint> backends;
  IouThreshold iou_threshold;
  std::vector<MrKind> mrs{std::begin(kAllMrs), std::end(kAllMrs)};
  int workers = 1;
  std::uint64_t seed = 0;
  double max_bad_line_ratio = kDefaultMaxBadLineRatio;
  std::optional<fs::path> prompt_template;
  std::optional<fs::path> icl_pool;
  std::size_t icl_examples = PromptSpec::kDefaultExampleCount;

  // Every role on `url`.
  static RunConfig with_backend(const std::string& url);
  // Relative paths resolve against `base_dir`. Throws Error(kConfig).
  static RunConfig from_json(const nlohmann::json& j, const fs::path& base_dir = {});
  static RunConfig load(const fs::path& path);

  PromptSpec prompt_spec() const;
};

// Parses "MR1,MR3". Throws Error(kConfig).
std::vector<MrKind> parse_mr_list(std::string_view list);

// ---- backends --------------------------------------------------------------

class Backends {
 public:
  Backends(const RunConfig& config, const backends::ServiceRegistry& registry);

  // Throws Error(kConfig) when the role is not configured.
  const backends::BackendClient& at(backends::Role role) const;
  const backends::BackendClient* find(backends::Role role) const;

  // Role name -> backend metadata, "unreachable" when the health probe fails.
  // Throws Error(kBackendUnavailable) when no configured backend answers.
  std::map<std::string, std::string> probe() const;

 private:
  std::map<backends::Role, backends::BackendClient> clients_;
};

// ---- suite files -----------------------------------------------------------

inline constexpr std::string_view kManifestFile = "manifest.jsonl";
inline constexpr std::string_view kAlignmentsFile = "alignments.jsonl";
inline constexpr std::string_view kGenerationFile = "generation.json";
inline constexpr std::string_view kPredictionsFile = "predictions.jsonl";
inline constexpr std::string_view kIssuesFile = "issues.jsonl";
inline constexpr std::string_view kReportJsonFile = "report.json";
inline constexpr std::string_view kReportMdFile = "report.md";
inline constexpr std::string_view kVtrFile = "vtr.json";

std::vector<GeneratedTest> read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, std::vector<GeneratedTest> tests);

// ---- generate --------------------------------------------------------------

using Counts = std::map<std::string, std::size_t>;

struct GenerationSummary {
  std::size_t records = 0;
  std::size_t processed = 0;
  // "sample.*" reasons; processed + sum(skipped) == records.
  Counts skipped;
  Counts unit_skips;
  Counts instantiation_skips;
  Counts warnings;
  std::map<MrKind, std::size_t> generated;
  std::string prompt_version;
  std::string prompt_sha256;
  std::map<std::string, std::string> backend_metadata;

  std::size_t total_generated() const;
};

nlohmann::json to_json(const GenerationSummary& s);
GenerationSummary generation_summary_from_json(const nlohmann::json& j);

// Deconstructs, aligns and instantiates every entailment record and writes the
// suite under config.output_dir. Existing outputs are rewritten only when
// their content changes; stale premise images are removed.
// Throws Error(kBackendUnavailable) when no backend is reachable and
// Error(kIo) when the output cannot be written.
GenerationSummary generate(const RunConfig& config, const Backends& backends);

// ---- execute ---------------------------------------------------------------

struct PredictionRecord {
  std::string test_id;
  std::optional<backends::Prediction> prediction;
  // Reason code when the prediction failed.
  std::string error;
};

std::vector<PredictionRecord> read_predictions(const fs::path& path);

struct ExecutionSummary {
  std::size_t tests = 0;
  std::size_t resumed = 0;
  std::size_t predicted = 0;
  std::size_t failed = 0;
};

// Predicts every test without a stored prediction; failed tests are retried
// on the next call. Progress is flushed to disk in batches.
ExecutionSummary execute(const fs::path& suite_dir, const backends::BackendClient& predictor,
                         int workers);

// ---- detect / report -------------------------------------------------------

struct MrStats {
  std::size_t generated = 0;
  std::size_t gnum = 0;
  std::size_t inum = 0;

  std::optional<double> ifr() const;
};

struct RunReport {
  std::size_t records = 0;
  std::size_t processed = 0;
  std::size_t generated = 0;
  // Tests with a prediction.
  std::size_t gnum = 0;
  std::size_t inum = 0;
  std::map<MrKind, MrStats> per_mr;
  Counts skips;
  std::string prompt_version;
  std::string prompt_sha256;
  std::map<std::string, std::string> backend_metadata;
  std::optional<VtrResult> vtr;

  std::optional<double> ifr() const;
  std::optional<double> accuracy() const;
};

nlohmann::json to_json(const RunReport& r);
RunReport run_report_from_json(const nlohmann::json& j);

struct Issue {
  GeneratedTest test;
  Label predicted = Label::kEntailment;
};

struct Detection {
  RunReport report;
  std::vector<Issue> issues;
};

// Pure: a test is an issue iff its prediction differs from the oracle.
Detection detect_issues(const std::vector<GeneratedTest>& suite,
                        const std::vector<PredictionRecord>& predictions,
                        const GenerationSummary& generation);

// Reads the suite, writes issues.jsonl and report.json.
Detection detect_issues(const fs::path& suite_dir);

// "12.5%", or "n/a" when undefined.
std::string format_percent(std::optional<double> ratio);
std::string render_markdown(const RunReport& r);

// Writes report.md from report.json (and vtr.json when present); returns the
// Markdown.
std::string write_report(const fs::path& suite_dir);

// ---- review and retraining files -------------------------------------------

VtrSheet sample_vtr(const fs::path& suite_dir, std::size_t n, std::uint64_t seed,
                    const fs::path& sheet_path);
// Computes the VTR of a filled-in sheet and stores it as vtr.json in the suite.
VtrResult ingest_vtr(const fs::path& sheet_path, const fs::path& suite_dir);

struct SplitSizes {
  std::size_t improve = 0;
  std::size_t eval = 0;
};

// Writes improve.jsonl and eval.jsonl under `out_dir`.
SplitSizes split_suite(const fs::path& suite_dir, SplitRatio ratio, std::uint64_t seed,
                       const fs::path& out_dir);

// ---- end-to-end ------------------------------------------------------------

struct PipelineResult {
  GenerationSummary generation;
  ExecutionSummary execution;
  Detection detection;
};

// generate + execute + detect + report.
PipelineResult run_pipeline(const RunConfig& config, const Backends& backends);

struct SelftestOptions {
  int scenes = 50;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string backend_url = "inprocess:synthetic";
  fs::path work_dir;
};

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestResult {
  std::vector<SelftestCheck> checks;
  RunReport report;

  bool passed() const;
};

// Builds a synthetic corpus under work_dir, runs the pipeline against
// `backend_url` and checks it against scene ground truth.
SelftestResult run_selftest(const SelftestOptions& options);

}  // namespace vemorph

#endif  // VEMORPH_HARNESS_HPP_
