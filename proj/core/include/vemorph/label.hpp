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

#ifndef VEMORPH_LABEL_HPP_
#define VEMORPH_LABEL_HPP_

#include <optional>
#include <string_view>

namespace vemorph {

// The three-class visual entailment codomain.
enum class Label { kEntailment, kNeutral, kContradiction };

// "entailment" | "neutral" | "contradiction"
std::string_view to_string(Label label) noexcept;
std::optional<Label> parse_label(std::string_view s) noexcept;

}  // namespace vemorph

#endif  // VEMORPH_LABEL_HPP_
