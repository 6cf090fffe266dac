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

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "vemorph/backends/transport.hpp"
#include "vemorph/error.hpp"
#include "vemorph/harness.hpp"
#include "vemorph/synthetic.hpp"

namespace {

using namespace vemorph;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAborted = 2;
constexpr int kExitSelftest = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string mrs;
  std::optional<double> iou;
  std::string output;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* opt = cmd->add_option("--config", o.config, "run configuration (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", o.seed, "override the configured seed");
  cmd->add_option("--workers", o.workers, "override the worker count")->check(CLI::PositiveNumber);
  cmd->add_option("--mrs", o.mrs, "comma-separated MR subset, e.g. MR1,MR3");
  cmd->add_option("--iou-threshold", o.iou, "override the overlap threshold")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--output", o.output, "override the output directory");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = RunConfig::load(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (!o.mrs.empty()) c.mrs = parse_mr_list(o.mrs);
  if (o.iou) c.iou_threshold = IouThreshold(*o.iou);
  if (!o.output.empty()) c.output_dir = o.output;
  return c;
}

std::string suite_of(const std::string& suite, const Overrides& o) {
  if (!suite.empty()) return suite;
  if (o.config.empty()) throw CLI::ValidationError("--suite", "either --suite or --config is required");
  return resolve(o).output_dir.string();
}

void print_counts(const char* title, const Counts& counts) {
  if (counts.empty()) return;
  std::cout << title << ":\n";
  for (const auto& [k, v] : counts) std::cout << fmt::format("  {:<44} {}\n", k, v);
}

void print_generation(const GenerationSummary& g) {
  std::cout << fmt::format("records {}  processed {}  generated {}\n", g.records, g.processed,
                           g.total_generated());
  for (const auto& [mr, n] : g.generated) std::cout << fmt::format("  {} {}\n", to_string(mr), n);
  print_counts("skipped", g.skipped);
  print_counts("unit skips", g.unit_skips);
  print_counts("instantiation skips", g.instantiation_skips);
  print_counts("warnings", g.warnings);
}

void print_report(const RunReport& r) {
  std::cout << fmt::format("gnum {}  inum {}  ifr {}\n", r.gnum, r.inum, format_percent(r.ifr()));
  for (const auto& [mr, s] : r.per_mr) {
    std::cout << fmt::format("  {} gnum {} inum {} ifr {}\n", to_string(mr), s.gnum, s.inum,
                             format_percent(s.ifr()));
  }
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metamorphic test generation for visual entailment systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vemorph 0.1.0");

  Overrides gen_o, exec_o, detect_o, run_o, misc_o;
  std::string suite, sheet, out_dir, ratio = "8:2", service = "inprocess:synthetic";
  std::string backend_url = "inprocess:synthetic", work_dir, predict_url, host = "127.0.0.1";
  std::size_t n_review = kDefaultVtrSample;
  std::uint64_t seed = 0;
  int scenes = 50, workers = 1, port = 0;

  auto* generate_cmd = app.add_subcommand("generate", "build a test suite from a dataset");
  add_overrides(generate_cmd, gen_o, true);

  auto* execute_cmd = app.add_subcommand("execute", "run the suite against the predict backend");
  add_overrides(execute_cmd, exec_o, true);
  execute_cmd->add_option("--predict", predict_url, "predict backend URL (overrides config)");

  auto* detect_cmd = app.add_subcommand("detect", "compare predictions with oracles");
  add_overrides(detect_cmd, detect_o, false);
  detect_cmd->add_option("--suite", suite, "suite directory");

  auto* report_cmd = app.add_subcommand("report", "render report.md");
  report_cmd->add_option("--suite", suite, "suite directory")->required();

  auto* run_cmd = app.add_subcommand("run", "generate, execute, detect and report");
  add_overrides(run_cmd, run_o, true);

  auto* sample_cmd = app.add_subcommand("sample-vtr", "draw a review sheet");
  sample_cmd->add_option("--suite", suite, "suite directory")->required();
  sample_cmd->add_option("-n,--count", n_review, "tests to sample");
  sample_cmd->add_option("--seed", seed, "sampling seed");
  sample_cmd->add_option("--out", sheet, "sheet path")->required();

  auto* ingest_cmd = app.add_subcommand("ingest-vtr", "compute VTR from a reviewed sheet");
  ingest_cmd->add_option("--sheet", sheet, "reviewed sheet")->required();
  ingest_cmd->add_option("--suite", suite, "suite directory")->required();

  auto* split_cmd = app.add_subcommand("split", "partition the suite for retraining");
  split_cmd->add_option("--suite", suite, "suite directory")->required();
  split_cmd->add_option("--ratio", ratio, "improve:eval ratio");
  split_cmd->add_option("--seed", seed, "partition seed");
  split_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* selftest_cmd = app.add_subcommand("selftest", "synthetic end-to-end check");
  selftest_cmd->add_option("--scenes", scenes, "synthetic scenes")->check(CLI::PositiveNumber);
  selftest_cmd->add_option("--seed", seed, "corpus seed");
  selftest_cmd->add_option("--workers", workers, "worker count")->check(CLI::PositiveNumber);
  selftest_cmd->add_option("--backend", backend_url, "backend URL for every role");
  selftest_cmd->add_option("--work-dir", work_dir, "scratch directory");

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic corpus");
  synth_cmd->add_option("--out", out_dir, "output directory")->required();
  synth_cmd->add_option("--scenes", scenes, "scene count")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", seed, "corpus seed");

  auto* serve_cmd = app.add_subcommand("serve", "serve an in-process backend over HTTP");
  serve_cmd->add_option("--service", service, "inprocess:<name>[?k=v]");
  serve_cmd->add_option("--host", host, "listen address");
  serve_cmd->add_option("--port", port, "listen port (0 picks one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto registry = synthetic::standard_registry();

    if (generate_cmd->parsed()) {
      const RunConfig c = resolve(gen_o);
      print_generation(generate(c, Backends(c, registry)));
    } else if (execute_cmd->parsed()) {
      RunConfig c = resolve(exec_o);
      if (!predict_url.empty()) c.backends[backends::Role::kPredict].base_url = predict_url;
      c.backends[backends::Role::kPredict].role = backends::Role::kPredict;
      const Backends b(c, registry);
      const auto s = execute(c.output_dir, b.at(backends::Role::kPredict), c.workers);
      std::cout << fmt::format("tests {}  resumed {}  predicted {}  failed {}\n", s.tests,
                               s.resumed, s.predicted, s.failed);
    } else if (detect_cmd->parsed()) {
      print_report(detect_issues(suite_of(suite, detect_o)).report);
    } else if (report_cmd->parsed()) {
      std::cout << write_report(suite);
    } else if (run_cmd->parsed()) {
      const RunConfig c = resolve(run_o);
      const auto r = run_pipeline(c, Backends(c, registry));
      print_generation(r.generation);
      print_report(r.detection.report);
    } else if (sample_cmd->parsed()) {
      const auto s = sample_vtr(suite, n_review, seed, sheet);
      std::cout << fmt::format("sampled {} tests into {}\n", s.entries.size(), sheet);
    } else if (ingest_cmd->parsed()) {
      const auto r = ingest_vtr(sheet, suite);
      std::cout << fmt::format("VTR {} ({} valid, {} invalid)\n", format_percent(r.vtr), r.valid,
                               r.invalid);
    } else if (split_cmd->parsed()) {
      SplitRatio parsed;
      if (std::sscanf(ratio.c_str(), "%d:%d", &parsed.improve, &parsed.eval) != 2) {
        std::cerr << "--ratio expects A:B\n";
        return kExitUsage;
      }
      const auto s = split_suite(suite, parsed, seed, out_dir);
      std::cout << fmt::format("improve {}  eval {}\n", s.improve, s.eval);
    } else if (selftest_cmd->parsed()) {
      SelftestOptions o;
      o.scenes = scenes;
      o.seed = seed == 0 ? 1 : seed;
      o.workers = workers;
      o.backend_url = backend_url;
      o.work_dir = work_dir;
      const auto r = run_selftest(o);
      for (const auto& c : r.checks) {
        std::cout << fmt::format("[{}] {} ({})\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
      }
      print_report(r.report);
      return r.passed() ? kExitOk : kExitSelftest;
    } else if (synth_cmd->parsed()) {
      synthetic::CorpusOptions o;
      o.scenes = scenes;
      o.seed = seed == 0 ? 1 : seed;
      const auto corpus = synthetic::write_corpus(out_dir, o);
      std::cout << fmt::format("wrote {} samples to {}\n", corpus.samples.size(), out_dir);
    } else if (serve_cmd->parsed()) {
      backends::HttpServiceHost server(registry.resolve(service), host, port);
      std::cout << fmt::format("serving {} on {}\n", service, server.base_url()) << std::flush;
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    std::cerr << fmt::format("error [{}]: {}\n", e.reason(), e.what());
    return e.code() == ErrorCode::kConfig ? kExitUsage : kExitAborted;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAborted;
  }
  return kExitOk;
}
