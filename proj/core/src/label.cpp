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

#include "vemorph/label.hpp"

namespace vemorph {

std::string_view to_string(Label label) noexcept {
  switch (label) {
    case Label::kEntailment: return "entailment";
    case Label::kNeutral: return "neutral";
    case Label::kContradiction: return "contradiction";
  }
  return "entailment";
}

std::optional<Label> parse_label(std::string_view s) noexcept {
  if (s == "entailment") return Label::kEntailment;
  if (s == "neutral") return Label::kNeutral;
  if (s == "contradiction") return Label::kContradiction;
  return std::nullopt;
}

}  // namespace vemorph
