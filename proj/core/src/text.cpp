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

#include "vemorph/text.hpp"

#include <algorithm>
#include <cctype>

namespace vemorph::text {
namespace {

char lower(char c) noexcept {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

bool equal_ci_at(std::string_view haystack, std::size_t pos,
                 std::string_view needle) noexcept {
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (lower(haystack[pos + i]) != lower(needle[i])) return false;
  }
  return true;
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), lower);
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  const auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_word_char(char c) noexcept {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '\'' || c == '-';
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) words.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::optional<std::size_t> find_substring(std::string_view haystack,
                                          std::string_view needle,
                                          std::size_t from) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  for (std::size_t pos = from; pos + needle.size() <= haystack.size(); ++pos) {
    if (equal_ci_at(haystack, pos, needle)) return pos;
  }
  return std::nullopt;
}

std::optional<std::size_t> find_word(std::string_view haystack,
                                     std::string_view needle, std::size_t from) {
  for (auto pos = find_substring(haystack, needle, from); pos;
       pos = find_substring(haystack, needle, *pos + 1)) {
    const std::size_t end = *pos + needle.size();
    const bool left = *pos == 0 || !is_word_char(haystack[*pos - 1]);
    const bool right = end == haystack.size() || !is_word_char(haystack[end]);
    if (left && right) return pos;
  }
  return std::nullopt;
}

bool contains_word(std::string_view haystack, std::string_view needle) {
  return find_word(haystack, needle).has_value();
}

}  // namespace vemorph::text
