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

#ifndef VEMORPH_MR_ENGINE_HPP_
#define VEMORPH_MR_ENGINE_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vemorph/alignment.hpp"
#include "vemorph/backends/client.hpp"
#include "vemorph/label.hpp"

namespace vemorph {

// MR1: erase a linked object and its description (oracle stays entailment).
// MR2: erase a linked object only (oracle becomes contradiction).
// MR3: erase an un-linked object only (oracle stays entailment).
enum class MrKind { kMr1, kMr2, kMr3 };

inline constexpr MrKind kAllMrs[] = {MrKind::kMr1, MrKind::kMr2, MrKind::kMr3};

std::string_view to_string(MrKind mr) noexcept;
std::optional<MrKind> parse_mr(std::string_view s) noexcept;
Label oracle_for(MrKind mr) noexcept;

// A deconstructed source sample ready for instantiation.
struct SourceSample {
  std::string id;
  std::string hypothesis;
  Label label = Label::kEntailment;
  Image image;
  std::vector<ObjectDescriptionUnit> units;
};

struct Instantiation {
  MrKind mr = MrKind::kMr1;
  // Index into alignment.linked (MR1, MR2) or alignment.unlinked (MR3).
  std::size_t target = 0;
  BBox region;
  // Boxes the erasure was checked against.
  std::vector<BBox> compared;
};

// The boxes a target must not overlap by more than t: every detected box
// except the target's own detection, plus every other linked region. The own
// detection is the exact copy of the target if present, else the single
// best-overlapping detected box when that overlap exceeds t.
std::vector<BBox> feasibility_set(const AlignmentResult& alignment, MrKind mr,
                                  std::size_t target, IouThreshold t);

// Empty unless the source is labeled entailment. MR1 additionally needs two or
// more units in the hypothesis.
std::vector<Instantiation> applicable_instantiations(const SourceSample& sample,
                                                     const AlignmentResult& alignment,
                                                     IouThreshold t);

// Masks the region and asks the inpainter to fill it. Throws
// Error(kDegenerateBox) when the region covers no pixel center and
// Error(kDimensionMismatch) when the inpainter changes the image size.
Image erase_object(const Image& image, const BBox& region,
                   const backends::BackendClient& inpainter);

struct SynonymOutcome {
  std::string text;
  std::vector<backends::Substitution> substitutions;
  // Reason code when the backend failed and the identity was used instead.
  std::optional<std::string> warning;
};

// Identity when `synonymizer` is null. Backend failures, and answers whose
// substitutions do not replay onto the input, fall back to the identity.
SynonymOutcome synonym_transform(std::string_view text,
                                 const backends::BackendClient* synonymizer);

struct Provenance {
  BBox erased_region;
  std::optional<ObjectDescriptionUnit> erased_unit;
  std::vector<backends::Substitution> substitutions;
  std::vector<BBox> compared;

  bool operator==(const Provenance&) const = default;
};

struct GeneratedTest {
  std::string test_id;
  std::string source_id;
  MrKind mr = MrKind::kMr1;
  // Relative path of the perturbed premise inside the suite directory.
  std::string premise;
  std::string hypothesis;
  std::string source_hypothesis;
  Label oracle = Label::kEntailment;
  Provenance provenance;

  bool operator==(const GeneratedTest&) const = default;
};

struct EmittedTest {
  GeneratedTest test;
  Image premise_image;
  std::vector<std::string> warnings;
};

// 16 hex digits of SHA-256 over source id, MR and region.
std::string make_test_id(std::string_view source_id, MrKind mr, const BBox& region);

EmittedTest apply_mr1(const SourceSample& sample, const AlignmentResult& alignment,
                      const Instantiation& inst, const backends::BackendClient& inpainter,
                      const backends::BackendClient* synonymizer);
EmittedTest apply_mr2(const SourceSample& sample, const AlignmentResult& alignment,
                      const Instantiation& inst, const backends::BackendClient& inpainter);
EmittedTest apply_mr3(const SourceSample& sample, const AlignmentResult& alignment,
                      const Instantiation& inst, const backends::BackendClient& inpainter);

// Dispatches on inst.mr.
EmittedTest apply(const SourceSample& sample, const AlignmentResult& alignment,
                  const Instantiation& inst, const backends::BackendClient& inpainter,
                  const backends::BackendClient* synonymizer);

nlohmann::json to_json(const GeneratedTest& t);
// Throws Error(kValidation), including when the MR/oracle/hypothesis
// invariants do not hold.
GeneratedTest generated_test_from_json(const nlohmann::json& j);

}  // namespace vemorph

#endif  // VEMORPH_MR_ENGINE_HPP_
