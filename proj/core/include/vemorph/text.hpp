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

#ifndef VEMORPH_TEXT_HPP_
#define VEMORPH_TEXT_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// ASCII-only helpers; hypotheses are English text.
namespace vemorph::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s) noexcept;
bool is_word_char(char c) noexcept;

// Whitespace-separated tokens.
std::vector<std::string> split_words(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// First case-insensitive occurrence of `needle` at or after `from` whose both
// ends fall on word boundaries.
std::optional<std::size_t> find_word(std::string_view haystack,
                                     std::string_view needle,
                                     std::size_t from = 0);
// Same, without the boundary requirement.
std::optional<std::size_t> find_substring(std::string_view haystack,
                                          std::string_view needle,
                                          std::size_t from = 0);

bool contains_word(std::string_view haystack, std::string_view needle);

}  // namespace vemorph::text

#endif  // VEMORPH_TEXT_HPP_
