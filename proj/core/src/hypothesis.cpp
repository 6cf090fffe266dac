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

#include "vemorph/hypothesis.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "json.hpp"
#include "vemorph/error.hpp"
#include "vemorph/io.hpp"
#include "vemorph/resources.hpp"
#include "vemorph/text.hpp"

namespace vemorph {
namespace {

using nlohmann::json;

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string require_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw Error(ErrorCode::kConfig,
                fmt::format("prompt template field '{}' missing or not a string", key));
  }
  return j.at(key).get<std::string>();
}

// Locates a phrase, preferring a whole-word match and falling back to a raw
// substring ("sit" inside "sits").
std::optional<std::size_t> locate(std::string_view haystack, std::string_view needle,
                                  std::size_t from = 0) {
  if (auto pos = text::find_word(haystack, needle, from)) return pos;
  return text::find_substring(haystack, needle, from);
}

bool is_article(std::string_view word) {
  const std::string w = text::to_lower(word);
  return w == "a" || w == "an" || w == "the";
}

std::size_t unit_start(const ObjectDescriptionUnit& u) {
  return u.property_index ? std::min(u.object_index, *u.property_index)
                          : u.object_index;
}

// The article directly before `pos`, if any.
std::optional<std::string> article_before(std::string_view hypothesis, std::size_t pos) {
  std::size_t end = pos;
  while (end > 0 && std::isspace(static_cast<unsigned char>(hypothesis[end - 1]))) --end;
  std::size_t begin = end;
  while (begin > 0 && text::is_word_char(hypothesis[begin - 1])) --begin;
  if (begin == end || end == pos) return std::nullopt;
  std::string_view word = hypothesis.substr(begin, end - begin);
  if (!is_article(word)) return std::nullopt;
  return std::string(word);
}

struct ReducedUnit {
  const ObjectDescriptionUnit* unit;
  std::string text;
};

std::vector<ReducedUnit> reduce_remaining(std::span<const ObjectDescriptionUnit> units,
                                          const ObjectDescriptionUnit& erased) {
  auto it = std::find(units.begin(), units.end(), erased);
  if (it == units.end()) {
    throw Error(ErrorCode::kValidation, "erased unit is not part of the unit list");
  }
  std::vector<ReducedUnit> remaining;
  for (const auto& u : units) {
    if (&u == &*it) continue;
    // A second mention of the erased object cannot survive the erasure.
    if (text::contains_word(u.object, erased.object)) continue;
    if (!u.property.empty() && text::contains_word(u.property, erased.object)) {
      remaining.push_back({&u, u.object});
    } else {
      remaining.push_back({&u, u.text});
    }
  }
  if (remaining.empty()) {
    throw Error(ErrorCode::kNoRemainingUnits,
                fmt::format("erasing '{}' leaves no description", erased.text));
  }
  std::stable_sort(remaining.begin(), remaining.end(),
                   [](const ReducedUnit& a, const ReducedUnit& b) {
                     return a.unit->object_index < b.unit->object_index;
                   });
  return remaining;
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, fmt::format("prompt template is not JSON: {}", e.what()));
  }
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "prompt template must be an object");
  PromptTemplate t;
  t.version = require_field(j, "version");
  t.instruction = require_field(j, "instruction");
  t.examples_header = require_field(j, "examples_header");
  t.example_format = require_field(j, "example_format");
  t.input_header = require_field(j, "input_header");
  t.input_format = require_field(j, "input_format");
  const auto first = t.input_format.find(kSlot);
  if (first == std::string::npos ||
      t.input_format.find(kSlot, first + kSlot.size()) != std::string::npos) {
    throw Error(ErrorCode::kConfig, "input_format must contain the slot exactly once");
  }
  t.sha256 = sha256_hex(json_text);
  return t;
}

const PromptTemplate& PromptTemplate::builtin() {
  static const PromptTemplate t = parse(resources::extraction_prompt());
  return t;
}

std::vector<IclExample> parse_candidate_pool(std::string_view json_text) {
  std::vector<IclExample> pool;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, fmt::format("candidate pool is not JSON: {}", e.what()));
  }
  if (!j.is_array()) throw Error(ErrorCode::kConfig, "candidate pool must be an array");
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("input") || !entry["input"].is_string() ||
        !entry.contains("output")) {
      throw Error(ErrorCode::kConfig, "candidate pool entry needs 'input' and 'output'");
    }
    std::vector<ExtractionPair> pairs;
    try {
      pairs = parse_extraction(entry["output"].dump());
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, fmt::format("bad candidate output: {}", e.what()));
    }
    pool.push_back({entry["input"].get<std::string>(), render_extraction(pairs)});
  }
  return pool;
}

const std::vector<IclExample>& builtin_candidate_pool() {
  static const std::vector<IclExample> pool = parse_candidate_pool(resources::icl_pool());
  return pool;
}

PromptSpec default_prompt_spec() {
  return {PromptTemplate::builtin(),
          select_icl_examples(builtin_candidate_pool(), PromptSpec::kDefaultExampleCount)};
}

std::vector<IclExample> select_icl_examples(std::span<const IclExample> pool,
                                            std::size_t k) {
  if (pool.empty()) throw Error(ErrorCode::kEmptyPool, "candidate pool is empty");
  std::vector<IclExample> sorted(pool.begin(), pool.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const IclExample& a, const IclExample& b) {
                     if (a.input.size() != b.input.size()) {
                       return a.input.size() > b.input.size();
                     }
                     return a.input < b.input;
                   });
  if (sorted.size() > k) sorted.resize(k);
  return sorted;
}

std::string build_prompt(std::string_view hypothesis, const PromptSpec& spec) {
  const PromptTemplate& t = spec.layout;
  std::string prompt = t.instruction;
  prompt += '\n';
  if (!spec.examples.empty()) {
    prompt += t.examples_header;
    prompt += '\n';
    for (std::size_t i = 0; i < spec.examples.size(); ++i) {
      // {input}/{output} are filled last so example text is never re-scanned
      // for placeholders.
      std::string rendered = t.example_format;
      replace_all(rendered, "{index}", std::to_string(i + 1));
      const auto in_pos = rendered.find("{input}");
      const auto out_pos = rendered.find("{output}");
      if (out_pos != std::string::npos) {
        rendered.replace(out_pos, 8, spec.examples[i].output);
      }
      if (in_pos != std::string::npos) {
        rendered.replace(in_pos, 7, spec.examples[i].input);
      }
      prompt += rendered;
      prompt += '\n';
    }
  }
  prompt += t.input_header;
  prompt += '\n';
  std::string input = t.input_format;
  input.replace(input.find(PromptTemplate::kSlot), PromptTemplate::kSlot.size(),
                hypothesis);
  prompt += input;
  return prompt;
}

std::vector<ExtractionPair> parse_extraction(std::string_view response) {
  const auto open = response.find('[');
  const auto close = response.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw Error(ErrorCode::kMalformedResponse, "response holds no JSON array");
  }
  json j;
  try {
    j = json::parse(response.substr(open, close - open + 1));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, fmt::format("invalid JSON: {}", e.what()));
  }
  std::vector<ExtractionPair> pairs;
  for (const auto& entry : j) {
    if (!entry.is_object()) {
      throw Error(ErrorCode::kMalformedResponse, "array entry is not an object");
    }
    const auto object = entry.find("object");
    const auto property = entry.find("property");
    if (object == entry.end() || !object->is_string() || property == entry.end() ||
        !property->is_string()) {
      throw Error(ErrorCode::kMalformedResponse,
                  "entry needs string fields 'object' and 'property'");
    }
    ExtractionPair p{std::string(text::trim(object->get<std::string>())),
                     std::string(text::trim(property->get<std::string>()))};
    if (!p.object.empty()) pairs.push_back(std::move(p));
  }
  return pairs;
}

std::string render_extraction(std::span<const ExtractionPair> pairs) {
  json j = json::array();
  for (const auto& p : pairs) j.push_back({{"object", p.object}, {"property", p.property}});
  return j.dump();
}

const PluralRules& PluralRules::defaults() {
  static const PluralRules rules{
      {"glass", "grass", "dress", "bus", "gas", "class", "boss", "cross", "lens",
       "canvas", "cactus", "octopus", "walrus", "iris", "mattress", "compass",
       "chess", "news", "tennis", "atlas", "bonus", "circus", "virus", "campus",
       "chorus", "moss", "press", "address", "actress", "princess", "waitress",
       "business", "harness", "bass", "brass", "pass", "series", "species",
       "bus", "plus", "this", "his", "its", "is", "was", "as", "yes", "us"},
      {"men", "women", "children", "people", "feet", "teeth", "mice", "geese",
       "oxen", "policemen", "firemen", "fishermen"},
      {"several", "many", "multiple", "few", "both", "numerous"}};
  return rules;
}

bool detect_plural(std::string_view object, const PluralRules& rules) {
  static const std::set<std::string> kNumerals = {"two", "three", "four", "five",
                                                  "six", "seven", "eight", "nine",
                                                  "ten"};
  std::vector<std::string> words;
  for (auto& w : text::split_words(object)) {
    std::string cleaned;
    for (char c : text::to_lower(w)) {
      if (text::is_word_char(c)) cleaned += c;
    }
    if (!cleaned.empty()) words.push_back(std::move(cleaned));
  }
  if (words.empty()) return false;
  for (const auto& w : words) {
    if (kNumerals.contains(w) || rules.quantifiers.contains(w) ||
        rules.irregular_plurals.contains(w)) {
      return true;
    }
    if (std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      unsigned long value = 0;
      auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
      if (ec == std::errc::result_out_of_range || (ec == std::errc() && value >= 2)) {
        return true;
      }
    }
  }
  const std::string& head = words.back();
  return head.size() > 1 && head.back() == 's' &&
         !rules.singular_exceptions.contains(head);
}

bool detect_plural(const ObjectDescriptionUnit& unit, const PluralRules& rules) {
  return detect_plural(unit.object, rules);
}

CombineResult combine_units(std::string_view hypothesis,
                            std::span<const ExtractionPair> pairs,
                            const PluralRules& rules) {
  CombineResult result;
  for (const auto& pair : pairs) {
    const auto object_pos = locate(hypothesis, pair.object);
    if (!object_pos) {
      result.dropped.push_back(pair);
      continue;
    }
    ObjectDescriptionUnit unit;
    unit.object = pair.object;
    unit.property = pair.property;
    unit.object_index = *object_pos;
    if (!pair.property.empty()) {
      // Prefer the occurrence that follows the object: repeated phrases such as
      // "is present" belong to the nearest preceding object.
      unit.property_index = locate(hypothesis, pair.property, *object_pos + pair.object.size());
      if (!unit.property_index) unit.property_index = locate(hypothesis, pair.property);
    }
    if (pair.property.empty()) {
      unit.text = pair.object;
    } else if (unit.property_index && *unit.property_index < unit.object_index) {
      unit.text = pair.property + " " + pair.object;
    } else {
      unit.text = pair.object + " " + pair.property;
    }
    unit.plural = detect_plural(unit.object, rules);
    result.units.push_back(std::move(unit));
  }
  std::stable_sort(result.units.begin(), result.units.end(),
                   [](const ObjectDescriptionUnit& a, const ObjectDescriptionUnit& b) {
                     return a.object_index < b.object_index;
                   });
  return result;
}

std::string reassemble_after_erase(std::span<const ObjectDescriptionUnit> units,
                                   const ObjectDescriptionUnit& erased) {
  std::vector<std::string> parts;
  for (auto& r : reduce_remaining(units, erased)) parts.push_back(std::move(r.text));
  return text::join(parts, " and ");
}

std::string reassemble_after_erase(std::string_view hypothesis,
                                   std::span<const ObjectDescriptionUnit> units,
                                   const ObjectDescriptionUnit& erased) {
  std::vector<std::string> parts;
  for (auto& r : reduce_remaining(units, erased)) {
    // A unit reduced to its bare object starts at the object.
    const std::size_t start =
        r.text == r.unit->object ? r.unit->object_index : unit_start(*r.unit);
    if (auto article = article_before(hypothesis, start)) {
      parts.push_back(*article + " " + r.text);
    } else {
      parts.push_back(std::move(r.text));
    }
  }
  return text::join(parts, " and ");
}

}  // namespace vemorph
