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

#include "vemorph/workflow.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "vemorph/error.hpp"
#include "vemorph/random.hpp"

namespace vemorph {

using nlohmann::json;

namespace {

bool by_id(const GeneratedTest& a, const GeneratedTest& b) { return a.test_id < b.test_id; }

// Sorted by id before the draw.
void seeded_shuffle(std::vector<GeneratedTest>& suite, std::uint64_t seed) {
  std::sort(suite.begin(), suite.end(), by_id);
  Rng rng(seed);
  rng.shuffle(suite);
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::kPending: return "pending";
    case Verdict::kValid: return "valid";
    case Verdict::kInvalid: return "invalid";
  }
  return "pending";
}

std::optional<Verdict> parse_verdict(std::string_view s) noexcept {
  for (Verdict v : {Verdict::kPending, Verdict::kValid, Verdict::kInvalid}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

VtrSheet sample_vtr(std::vector<GeneratedTest> suite, std::size_t n, std::uint64_t seed) {
  seeded_shuffle(suite, seed);
  suite.resize(std::min(n, suite.size()));
  std::sort(suite.begin(), suite.end(), by_id);

  VtrSheet sheet{seed, n, {}};
  for (auto& t : suite) sheet.entries.push_back({std::move(t), Verdict::kPending});
  return sheet;
}

json to_json(const VtrSheet& sheet) {
  json entries = json::array();
  for (const auto& e : sheet.entries) {
    json j = to_json(e.test);
    j["verdict"] = to_string(e.verdict);
    entries.push_back(std::move(j));
  }
  return {{"seed", sheet.seed}, {"requested", sheet.requested}, {"entries", entries}};
}

VtrSheet vtr_sheet_from_json(const json& j) {
  VtrSheet sheet;
  try {
    sheet.seed = j.at("seed").get<std::uint64_t>();
    sheet.requested = j.at("requested").get<std::size_t>();
    for (const auto& e : j.at("entries")) {
      auto verdict = parse_verdict(e.at("verdict").get<std::string>());
      if (!verdict) {
        throw Error(ErrorCode::kValidation,
                    fmt::format("unknown verdict '{}'", e.at("verdict").get<std::string>()));
      }
      sheet.entries.push_back({generated_test_from_json(e), *verdict});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, fmt::format("bad review sheet: {}", e.what()));
  }
  return sheet;
}

VtrResult compute_vtr(const VtrSheet& sheet) {
  if (sheet.entries.empty()) throw Error(ErrorCode::kEmptyReview, "review sheet has no entries");
  VtrResult r;
  std::size_t pending = 0;
  for (const auto& e : sheet.entries) {
    switch (e.verdict) {
      case Verdict::kValid: ++r.valid; break;
      case Verdict::kInvalid: ++r.invalid; break;
      case Verdict::kPending: ++pending; break;
    }
  }
  if (pending > 0) {
    throw Error(ErrorCode::kPendingVerdicts,
                fmt::format("{} of {} verdicts are still pending", pending, sheet.entries.size()));
  }
  r.vtr = static_cast<double>(r.valid) / static_cast<double>(r.valid + r.invalid);
  return r;
}

json to_json(const VtrResult& r) {
  return {{"valid", r.valid}, {"invalid", r.invalid}, {"vtr", r.vtr}};
}

VtrResult vtr_result_from_json(const json& j) {
  try {
    return {j.at("valid").get<std::size_t>(), j.at("invalid").get<std::size_t>(),
            j.at("vtr").get<double>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, fmt::format("bad VTR record: {}", e.what()));
  }
}

std::size_t eval_share(std::size_t n, SplitRatio ratio) {
  if (ratio.improve < 0 || ratio.eval < 0 || ratio.improve + ratio.eval == 0) {
    throw Error(ErrorCode::kConfig,
                fmt::format("invalid split ratio {}:{}", ratio.improve, ratio.eval));
  }
  return n * static_cast<std::size_t>(ratio.eval) /
         static_cast<std::size_t>(ratio.improve + ratio.eval);
}

SplitResult split_retrain(std::vector<GeneratedTest> suite, SplitRatio ratio,
                          std::uint64_t seed) {
  const std::size_t n_eval = eval_share(suite.size(), ratio);
  seeded_shuffle(suite, seed);
  SplitResult out;
  out.eval.assign(std::make_move_iterator(suite.begin()),
                  std::make_move_iterator(suite.begin() + static_cast<std::ptrdiff_t>(n_eval)));
  out.improve.assign(std::make_move_iterator(suite.begin() + static_cast<std::ptrdiff_t>(n_eval)),
                     std::make_move_iterator(suite.end()));
  std::sort(out.eval.begin(), out.eval.end(), by_id);
  std::sort(out.improve.begin(), out.improve.end(), by_id);
  return out;
}

}  // namespace vemorph
