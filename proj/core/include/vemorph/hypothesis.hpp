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

#ifndef VEMORPH_HYPOTHESIS_HPP_
#define VEMORPH_HYPOTHESIS_HPP_

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vemorph {

struct ExtractionPair {
  std::string object;
  std::string property;

  bool operator==(const ExtractionPair&) const = default;
};

// An object mention plus its property text, located in the hypothesis.
struct ObjectDescriptionUnit {
  std::string object;
  std::string property;
  std::size_t object_index = 0;
  std::optional<std::size_t> property_index;
  std::string text;
  bool plural = false;

  bool operator==(const ObjectDescriptionUnit&) const = default;
};

// One in-context example: a sentence and its gold extraction rendered as the
// JSON the extractor is expected to answer with.
struct IclExample {
  std::string input;
  std::string output;

  bool operator==(const IclExample&) const = default;
};

// Layout of the extraction prompt. Loaded from a versioned JSON resource;
// `sha256` is the digest of the resource bytes and is echoed in run reports.
struct PromptTemplate {
  static constexpr std::string_view kSlot = "[Input hypothesis]";

  std::string version;
  std::string instruction;
  std::string examples_header;
  // Placeholders: {index}, {input}, {output}.
  std::string example_format;
  std::string input_header;
  // Must contain kSlot exactly once.
  std::string input_format;
  std::string sha256;

  // Throws Error(kConfig) on a malformed resource.
  static PromptTemplate parse(std::string_view json_text);
  static const PromptTemplate& builtin();
};

struct PromptSpec {
  static constexpr std::size_t kDefaultExampleCount = 10;

  PromptTemplate layout;
  std::vector<IclExample> examples;
};

// Candidate pool shipped with the library.
const std::vector<IclExample>& builtin_candidate_pool();
// Parses `[{"input": str, "output": [{"object": str, "property": str}, ...]}]`.
std::vector<IclExample> parse_candidate_pool(std::string_view json_text);

// Builtin template with the ten longest builtin candidates.
PromptSpec default_prompt_spec();

// The k longest entries by character length; ties in lexicographic order of
// the sentence. Throws Error(kEmptyPool) on an empty pool.
std::vector<IclExample> select_icl_examples(std::span<const IclExample> pool,
                                            std::size_t k);

std::string build_prompt(std::string_view hypothesis, const PromptSpec& spec);

// Throws Error(kMalformedResponse) unless the response holds a JSON array of
// {"object": string, "property": string} objects. Text outside the outermost
// brackets is ignored. Fields are trimmed; entries with an empty object are
// dropped.
std::vector<ExtractionPair> parse_extraction(std::string_view response);
std::string render_extraction(std::span<const ExtractionPair> pairs);

struct PluralRules {
  std::set<std::string> singular_exceptions;
  std::set<std::string> irregular_plurals;
  std::set<std::string> quantifiers;

  static const PluralRules& defaults();
};

bool detect_plural(std::string_view object,
                   const PluralRules& rules = PluralRules::defaults());
bool detect_plural(const ObjectDescriptionUnit& unit,
                   const PluralRules& rules = PluralRules::defaults());

struct CombineResult {
  std::vector<ObjectDescriptionUnit> units;
  // Pairs whose object does not occur in the hypothesis.
  std::vector<ExtractionPair> dropped;
};

CombineResult combine_units(std::string_view hypothesis,
                            std::span<const ExtractionPair> pairs,
                            const PluralRules& rules = PluralRules::defaults());

// Removes `erased`, reduces remaining units whose property mentions the erased
// object to their bare object, and joins the rest with " and " in text order.
// Throws Error(kNoRemainingUnits) when nothing is left.
std::string reassemble_after_erase(std::span<const ObjectDescriptionUnit> units,
                                   const ObjectDescriptionUnit& erased);

// As above, but each remaining unit keeps the article ("a", "an", "the") that
// precedes it in `hypothesis`.
std::string reassemble_after_erase(std::string_view hypothesis,
                                   std::span<const ObjectDescriptionUnit> units,
                                   const ObjectDescriptionUnit& erased);

}  // namespace vemorph

#endif  // VEMORPH_HYPOTHESIS_HPP_
