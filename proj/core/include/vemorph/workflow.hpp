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

#ifndef VEMORPH_WORKFLOW_HPP_
#define VEMORPH_WORKFLOW_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vemorph/mr_engine.hpp"

namespace vemorph {

enum class Verdict { kPending, kValid, kInvalid };

std::string_view to_string(Verdict v) noexcept;
std::optional<Verdict> parse_verdict(std::string_view s) noexcept;

struct VtrEntry {
  GeneratedTest test;
  Verdict verdict = Verdict::kPending;
};

// Review sheet for manual validity checks. Entries are sorted by test id.
struct VtrSheet {
  std::uint64_t seed = 0;
  std::size_t requested = 0;
  std::vector<VtrEntry> entries;
};

inline constexpr std::size_t kDefaultVtrSample = 100;

// min(n, suite size) tests drawn without replacement; all verdicts pending.
VtrSheet sample_vtr(std::vector<GeneratedTest> suite, std::size_t n, std::uint64_t seed);

nlohmann::json to_json(const VtrSheet& sheet);
// Throws Error(kValidation).
VtrSheet vtr_sheet_from_json(const nlohmann::json& j);

struct VtrResult {
  std::size_t valid = 0;
  std::size_t invalid = 0;
  double vtr = 0.0;
};

// valid / (valid + invalid). Throws Error(kPendingVerdicts) while any verdict
// is pending and Error(kEmptyReview) for an empty sheet.
VtrResult compute_vtr(const VtrSheet& sheet);

nlohmann::json to_json(const VtrResult& r);
VtrResult vtr_result_from_json(const nlohmann::json& j);

struct SplitRatio {
  int improve = 8;
  int eval = 2;
};

// floor(n * eval / (improve + eval)). Throws Error(kConfig) on a ratio with a
// negative part or a zero sum.
std::size_t eval_share(std::size_t n, SplitRatio ratio);

struct SplitResult {
  std::vector<GeneratedTest> improve;
  std::vector<GeneratedTest> eval;
};

// Seeded partition; both halves sorted by test id.
SplitResult split_retrain(std::vector<GeneratedTest> suite, SplitRatio ratio,
                          std::uint64_t seed);

}  // namespace vemorph

#endif  // VEMORPH_WORKFLOW_HPP_
