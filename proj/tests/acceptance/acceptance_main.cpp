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


// One PASS/FAIL line per acceptance criterion; exits non-zero on any failure.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <iostream>
#include <string>
#include <tuple>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "test_support.hpp"
#include "vemorph/alignment.hpp"
#include "vemorph/backends/client.hpp"
#include "vemorph/error.hpp"
#include "vemorph/harness.hpp"
#include "vemorph/hypothesis.hpp"
#include "vemorph/io.hpp"
#include "vemorph/random.hpp"
#include "vemorph/synthetic.hpp"
#include "vemorph/workflow.hpp"

namespace vemorph {
namespace {

using backends::Role;
using nlohmann::json;
using testing::TempDir;

constexpr int kSoundnessScenes = 220;
constexpr std::uint64_t kSeed = 2026;

struct Outcome {
  std::vector<std::string> failures;
  std::string detail;

  template <typename... Args>
  void check(bool ok, fmt::format_string<Args...> f, Args&&... args) {
    if (!ok && failures.size() < 8) failures.push_back(fmt::format(f, std::forward<Args>(args)...));
  }
};

struct Criterion {
  std::string name;
  std::function<void(Outcome&)> body;
  double budget_seconds = 0.0;
};

// ---- geometry --------------------------------------------------------------

BBox random_box(Rng& rng, double space, double min_side, double max_side) {
  const double w = min_side + rng.unit() * (max_side - min_side);
  const double h = min_side + rng.unit() * (max_side - min_side);
  const double x = rng.unit() * (space - w);
  const double y = rng.unit() * (space - h);
  return {x, y, x + w, y + h};
}

void check_mask(Outcome& o, ImageDims dims, const BBox& b, std::size_t& boxes) {
  ++boxes;
  const Mask m = render_mask(dims, b);
  std::size_t expected = 0;
  for (int row = 0; row < dims.height; ++row) {
    for (int col = 0; col < dims.width; ++col) {
      const double cx = col + 0.5;
      const double cy = row + 0.5;
      const bool inside = cx >= b.x1 && cx < b.x2 && cy >= b.y1 && cy < b.y2;
      expected += inside;
      o.check(m.white(row, col) == inside, "mask {}x{} box ({},{},{},{}) pixel ({},{})",
              dims.width, dims.height, b.x1, b.y1, b.x2, b.y2, row, col);
    }
  }
  o.check(m.white_count() == expected, "mask count {} != {}", m.white_count(), expected);
}

void geometry_suite(Outcome& o) {
  Rng rng(kSeed);
  std::size_t overlapping = 0;
  for (int i = 0; i < 1000; ++i) {
    const BBox a = random_box(rng, 256, 25, 100);
    BBox b = random_box(rng, 256, 25, 100);
    if (i % 2 == 1) {
      const double dx = (a.x1 + a.x2) / 2 - (b.x1 + b.x2) / 2 + (rng.unit() - 0.5) * 20;
      const double dy = (a.y1 + a.y2) / 2 - (b.y1 + b.y2) / 2 + (rng.unit() - 0.5) * 20;
      b = {b.x1 + dx, b.y1 + dy, b.x2 + dx, b.y2 + dy};
    }
    const double v = iou(a, b);
    overlapping += v > 0;
    o.check(v >= 0.0 && v <= 1.0, "pair {}: iou {} out of range", i, v);
    o.check(v == iou(b, a), "pair {}: asymmetric", i);
    o.check(iou(a, a) == 1.0, "pair {}: iou(a,a) = {}", i, iou(a, a));
    const bool disjoint = a.x2 <= b.x1 || b.x2 <= a.x1 || a.y2 <= b.y1 || b.y2 <= a.y1;
    o.check(!disjoint || v == 0.0, "pair {}: disjoint but iou {}", i, v);
    const double grid = testing::grid_iou(a, b);
    o.check(std::abs(v - grid) <= 1e-3, "pair {}: iou {} vs grid {}", i, v, grid);
  }
  o.check(overlapping >= 400, "only {} overlapping pairs", overlapping);

  std::size_t boxes = 0;
  for (const ImageDims dims : {ImageDims{1, 1}, ImageDims{7, 5}, ImageDims{16, 9}, ImageDims{32, 32}}) {
    for (int x1 = 0; x1 < dims.width; ++x1)
      for (int x2 = x1 + 1; x2 <= dims.width; ++x2)
        for (int y1 = 0; y1 < dims.height; ++y1)
          for (int y2 = y1 + 1; y2 <= dims.height; ++y2)
            check_mask(o, dims, {double(x1), double(y1), double(x2), double(y2)}, boxes);
  }
  for (int i = 0; i < 5000; ++i) {
    const ImageDims dims{1 + static_cast<int>(rng.below(32)), 1 + static_cast<int>(rng.below(32))};
    auto q = [&](int extent) { return (static_cast<double>(rng.below(4 * extent + 9)) - 4) / 4.0; };
    double x1 = q(dims.width), x2 = q(dims.width), y1 = q(dims.height), y2 = q(dims.height);
    if (x1 > x2) std::swap(x1, x2);
    if (y1 > y2) std::swap(y1, y2);
    if (x1 == x2 || y1 == y2) continue;
    const bool covers_image = x2 > 0 && x1 < dims.width && y2 > 0 && y1 < dims.height;
    if (!covers_image) {
      bool degenerate = false;
      try {
        render_mask(dims, {x1, y1, x2, y2});
      } catch (const Error& e) {
        degenerate = e.code() == ErrorCode::kDegenerateBox;
      }
      o.check(degenerate, "box ({},{},{},{}) outside {}x{} not rejected", x1, y1, x2, y2,
              dims.width, dims.height);
      continue;
    }
    check_mask(o, dims, {x1, y1, x2, y2}, boxes);
  }
  o.detail = fmt::format("1000 pairs, {} masks", boxes);
}

// ---- alignment -------------------------------------------------------------

std::vector<BBox> sorted(std::vector<BBox> v) {
  std::sort(v.begin(), v.end(), [](const BBox& a, const BBox& b) {
    return std::tie(a.x1, a.y1, a.x2, a.y2) < std::tie(b.x1, b.y1, b.x2, b.y2);
  });
  return v;
}

void alignment_equivalence(Outcome& o) {
  synthetic::CorpusOptions opt;
  opt.scenes = 100;
  opt.seed = kSeed;
  const auto corpus = synthetic::build_corpus(opt);
  const auto detector = testing::synthetic_client(Role::kDetect);
  const auto grounder = testing::synthetic_client(Role::kGround);
  const IouThreshold t(0.1);
  std::size_t linked = 0;
  std::size_t unlinked = 0;
  for (std::size_t i = 0; i < corpus.scenes.size(); ++i) {
    const auto& s = corpus.samples[i];
    const auto a = align(synthetic::render(corpus.scenes[i]), testing::units_for(s.hypothesis),
                         detector, grounder, t);
    o.check(a.linked_regions() == s.linked, "{}: linked partition differs", s.id);
    o.check(sorted(a.unlinked) == sorted(s.unlinked), "{}: un-linked partition differs", s.id);
    linked += a.linked.size();
    unlinked += a.unlinked.size();
  }
  o.detail = fmt::format("100 scenes, {} linked, {} un-linked", linked, unlinked);
}

// ---- pipeline runs ---------------------------------------------------------

struct SoundnessRun {
  std::unique_ptr<TempDir> dir;
  testing::SyntheticRun run;
};

const SoundnessRun& reference_run() {
  static const SoundnessRun r = [] {
    SoundnessRun out;
    out.dir = std::make_unique<TempDir>("acceptance_reference");
    out.run = testing::run_synthetic(out.dir->path(), kSoundnessScenes, kSeed, "inprocess:synthetic", 2);
    return out;
  }();
  return r;
}

void mr_soundness(Outcome& o) {
  const auto& run = reference_run().run;
  const RunReport& r = run.result.detection.report;
  const auto expected = testing::expected_counts(run.corpus);
  o.check(run.corpus.samples.size() >= 200, "only {} samples", run.corpus.samples.size());
  o.check(r.processed == run.corpus.samples.size(), "processed {} of {}", r.processed,
          run.corpus.samples.size());
  for (MrKind mr : kAllMrs) {
    const std::size_t got = r.per_mr.count(mr) ? r.per_mr.at(mr).generated : 0;
    o.check(got == expected.at(mr), "{} generated {} expected {}", to_string(mr), got,
            expected.at(mr));
  }
  o.check(r.gnum > 0 && r.gnum == r.generated, "gnum {} of {}", r.gnum, r.generated);
  o.check(r.inum == 0, "inum {}", r.inum);
  o.check(r.ifr().has_value() && *r.ifr() == 0.0, "ifr not exactly 0");
  const json report = json::parse(testing::slurp(run.config.output_dir / "report.json"));
  o.check(report.at("inum") == 0 && report.at("ifr") == 0.0, "report.json disagrees");
  o.detail = fmt::format("{} samples, gnum {}, inum {}", run.corpus.samples.size(), r.gnum, r.inum);
}

void issue_accounting(Outcome& o) {
  TempDir dir("acceptance_accounting");
  const auto always = testing::run_synthetic(dir / "always", kSoundnessScenes, kSeed,
                                             "inprocess:always-entailment", 2);
  const RunReport& a = always.result.detection.report;
  const MrStats mr1 = a.per_mr.at(MrKind::kMr1);
  const MrStats mr2 = a.per_mr.at(MrKind::kMr2);
  const MrStats mr3 = a.per_mr.at(MrKind::kMr3);
  o.check(mr2.gnum > 0 && mr2.inum == mr2.gnum, "MR2 flagged {} of {}", mr2.inum, mr2.gnum);
  o.check(mr1.inum == 0 && mr3.inum == 0, "MR1/MR3 flagged {}/{}", mr1.inum, mr3.inum);
  const double expected_ifr = static_cast<double>(mr2.gnum) / static_cast<double>(a.gnum);
  o.check(a.ifr() && std::bit_cast<std::uint64_t>(*a.ifr()) == std::bit_cast<std::uint64_t>(expected_ifr),
          "ifr {} != {}", a.ifr().value_or(-1), expected_ifr);
  const json report = json::parse(testing::slurp(always.config.output_dir / "report.json"));
  o.check(report.at("ifr").get<double>() == expected_ifr, "report.json ifr {} != {}",
          report.at("ifr").dump(), expected_ifr);

  const std::uint64_t flip_seed = 7;
  const double p = 0.25;
  const auto flip = testing::run_synthetic(
      dir / "flip", kSoundnessScenes, kSeed,
      fmt::format("inprocess:random-flip?seed={}&p={}", flip_seed, p), 2);
  const RunReport& f = flip.result.detection.report;
  const synthetic::RandomFlipVe flips(flip_seed, p);
  const synthetic::ReferenceVe reference;
  std::size_t recount = 0;
  const auto suite = read_manifest(flip.config.output_dir / "manifest.jsonl");
  for (const auto& t : suite) {
    const Image premise = read_image(flip.config.output_dir / t.premise);
    Label predicted = reference.predict(premise, t.hypothesis).label;
    if (flips.flips(premise, t.hypothesis)) {
      predicted = predicted == Label::kEntailment ? Label::kContradiction : Label::kEntailment;
    }
    recount += predicted != t.oracle;
  }
  o.check(f.gnum == suite.size(), "random-flip gnum {} of {}", f.gnum, suite.size());
  o.check(f.inum == recount, "random-flip inum {} recount {}", f.inum, recount);
  o.check(recount > 0 && recount < suite.size(), "degenerate recount {}", recount);
  o.detail = fmt::format("always-entailment IFR {}/{}; random-flip inum {} = recount {}",
                         mr2.gnum, a.gnum, f.inum, recount);
}

// ---- applicability ---------------------------------------------------------

RunReport run_corpus(const fs::path& dir, const synthetic::CorpusOptions& opt,
                     const std::function<void(std::string&)>& edit = {}) {
  synthetic::write_corpus(dir / "corpus", opt);
  if (edit) {
    std::string text = testing::slurp(dir / "corpus" / "dataset.jsonl");
    edit(text);
    write_atomic(dir / "corpus" / "dataset.jsonl", text);
  }
  RunConfig c = RunConfig::with_backend("inprocess:synthetic");
  c.dataset = dir / "corpus" / "dataset.jsonl";
  c.image_dir = dir / "corpus";
  c.output_dir = dir / "suite";
  return run_pipeline(c, Backends(c, synthetic::standard_registry())).detection.report;
}

void applicability(Outcome& o) {
  TempDir dir("acceptance_applicability");
  synthetic::CorpusOptions opt;
  opt.scenes = 40;
  opt.seed = kSeed;
  std::size_t toggle = 0;
  const RunReport non_entailment = run_corpus(dir / "labels", opt, [&](std::string& text) {
    std::string out;
    std::size_t start = 0;
    while (start < text.size()) {
      const std::size_t end = text.find('\n', start);
      json j = json::parse(text.substr(start, end - start));
      j["label"] = (toggle++ % 2) ? "neutral" : "contradiction";
      out += j.dump() + "\n";
      start = end + 1;
    }
    text = out;
  });
  o.check(non_entailment.records == 40, "records {}", non_entailment.records);
  o.check(non_entailment.gnum == 0 && non_entailment.generated == 0, "non-entailment GNUM {}",
          non_entailment.gnum);

  opt.max_mentioned = 1;
  const RunReport single = run_corpus(dir / "single", opt);
  const std::size_t mr1 = single.per_mr.count(MrKind::kMr1) ? single.per_mr.at(MrKind::kMr1).generated : 0;
  o.check(mr1 == 0, "single-unit hypotheses produced {} MR1 tests", mr1);
  o.check(single.per_mr.at(MrKind::kMr2).generated == 40, "single-unit MR2 {}",
          single.per_mr.at(MrKind::kMr2).generated);
  o.detail = fmt::format("GNUM {} on Neutral/Contradiction; MR1 {} with MR2 {} on single-unit",
                         non_entailment.gnum, mr1, single.per_mr.at(MrKind::kMr2).generated);
}

// ---- reassembly ------------------------------------------------------------

void reassembly(Outcome& o) {
  const std::string rifle = "the man is aiming his rifle at something";
  const auto rifle_units =
      combine_units(rifle, parse_extraction(R"([{"object":"man","property":"is aiming his rifle at something"},{"object":"rifle","property":""}])"))
          .units;
  o.check(rifle_units.size() == 2, "rifle units {}", rifle_units.size());
  std::string reduced;
  if (rifle_units.size() == 2) reduced = reassemble_after_erase(rifle_units, rifle_units[1]);
  o.check(reduced == "man", "rifle reduced to '{}'", reduced);

  const std::string two_actors = "a girl stands nearby and a boy sits";
  const auto units =
      combine_units(two_actors, parse_extraction(R"([{"object":"girl","property":"stands nearby"},{"object":"boy","property":"sits"}])"))
          .units;
  SourceSample sample{"two_actors", two_actors, Label::kEntailment, Image({40, 40}, Rgb{255, 255, 255}), units};
  AlignmentResult alignment;
  alignment.linked = {{units.at(0), {2, 2, 12, 30}, std::nullopt},
                      {units.at(1), {22, 10, 32, 30}, std::nullopt}};
  alignment.detected = {{2, 2, 12, 30}, {22, 10, 32, 30}};
  std::string mr1;
  for (const auto& inst : applicable_instantiations(sample, alignment, IouThreshold{})) {
    if (inst.mr != MrKind::kMr1 || inst.target != 0) continue;
    backends::BackendEndpoint ep;
    ep.role = Role::kSynonym;
    ep.base_url = "inprocess:identity-synonym";
    const auto identity = backends::BackendClient::connect(ep, synthetic::standard_registry());
    mr1 = apply_mr1(sample, alignment, inst, testing::synthetic_client(Role::kInpaint), &identity)
              .test.hypothesis;
  }
  o.check(mr1 == "a boy sits", "two-actor MR1 hypothesis '{}'", mr1);
  o.detail = fmt::format("'{}', '{}'", reduced, mr1);
}

// ---- determinism -----------------------------------------------------------

void determinism(Outcome& o) {
  TempDir dir("acceptance_determinism");
  const auto one = testing::run_synthetic(dir / "w1", 60, kSeed, "inprocess:synthetic", 1);
  const auto four = testing::run_synthetic(dir / "w4", 60, kSeed, "inprocess:synthetic", 4);
  std::size_t compared = 0;
  for (const char* file : {"manifest.jsonl", "predictions.jsonl", "report.json", "report.md",
                           "issues.jsonl", "alignments.jsonl", "generation.json"}) {
    o.check(testing::slurp(one.config.output_dir / file) == testing::slurp(four.config.output_dir / file),
            "{} differs", file);
    ++compared;
  }
  for (const auto& t : read_manifest(one.config.output_dir / "manifest.jsonl")) {
    o.check(testing::slurp(one.config.output_dir / t.premise) ==
                testing::slurp(four.config.output_dir / t.premise),
            "{} differs", t.premise);
    ++compared;
  }
  o.detail = fmt::format("workers 1 vs 4, {} files byte-identical", compared);
}

// ---- workflow --------------------------------------------------------------

void workflow(Outcome& o) {
  const auto& run = reference_run().run;
  const fs::path suite = run.config.output_dir;
  const auto tests = read_manifest(suite / "manifest.jsonl");
  TempDir dir("acceptance_workflow");

  std::vector<GeneratedTest> hundred(tests.begin(), tests.begin() + 100);
  std::vector<std::string> sizes;
  for (std::size_t n : {std::size_t{100}, std::size_t{5}, std::size_t{4}, std::size_t{0}}) {
    std::vector<GeneratedTest> part(hundred.begin(), hundred.begin() + static_cast<long>(n));
    const SplitResult s = split_retrain(part, {8, 2}, kSeed);
    const std::size_t eval = (n * 2) / 10;
    o.check(s.eval.size() == eval && s.improve.size() == n - eval, "n={}: {}/{}", n,
            s.improve.size(), s.eval.size());
    std::set<std::string> ids;
    for (const auto& t : s.improve) ids.insert(t.test_id);
    for (const auto& t : s.eval) ids.insert(t.test_id);
    o.check(ids.size() == n, "n={}: split is not a partition", n);
    sizes.push_back(fmt::format("{}->{}/{}", n, s.improve.size(), s.eval.size()));
  }
  const SplitSizes whole = split_suite(suite, {8, 2}, kSeed, dir / "split");
  o.check(whole.eval == tests.size() * 2 / 10 && whole.improve + whole.eval == tests.size(),
          "suite split {}/{}", whole.improve, whole.eval);

  sample_vtr(suite, kDefaultVtrSample, kSeed, dir / "sheet.json");
  json sheet = json::parse(testing::slurp(dir / "sheet.json"));
  o.check(sheet.at("entries").size() == 100, "sheet has {} entries", sheet.at("entries").size());
  for (std::size_t i = 0; i < sheet["entries"].size(); ++i) {
    sheet["entries"][i]["verdict"] = i < 93 ? "valid" : "invalid";
  }
  write_atomic(dir / "sheet.json", sheet.dump());
  TempDir vtr_suite("acceptance_vtr");
  const VtrResult v = ingest_vtr(dir / "sheet.json", vtr_suite.path());
  o.check(v.valid == 93 && v.invalid == 7 && v.vtr == 93.0 / 100.0, "VTR {} ({}/{})", v.vtr,
          v.valid, v.invalid);
  o.detail = fmt::format("split {}; VTR {}", fmt::join(sizes, ", "), v.vtr);
}

}  // namespace
}  // namespace vemorph

int main() {
  using namespace vemorph;
  const std::vector<Criterion> criteria = {
      {"geometry suite", geometry_suite, 10.0},
      {"alignment oracle equivalence", alignment_equivalence, 30.0},
      {"MR soundness (zero false issues)", mr_soundness, 0.0},
      {"issue accounting", issue_accounting, 0.0},
      {"applicability rules", applicability, 0.0},
      {"reassembly golden cases", reassembly, 0.0},
      {"determinism across worker counts", determinism, 0.0},
      {"workflow math", workflow, 0.0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.failures.push_back(fmt::format("threw: {}", e.what()));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs >= c.budget_seconds) {
      o.failures.push_back(fmt::format("took {:.2f} s, budget {:.0f} s", secs, c.budget_seconds));
    }
    const bool ok = o.failures.empty();
    failed += !ok;
    std::cout << fmt::format("{} {} [{:.2f} s] {}\n", ok ? "PASS" : "FAIL", c.name, secs, o.detail);
    for (const auto& f : o.failures) std::cout << "    " << f << "\n";
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
