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

#ifndef VEMORPH_RANDOM_HPP_
#define VEMORPH_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace vemorph {

// std::mt19937_64's output sequence is fixed by the standard, but the
// <random> distributions are not. These helpers keep seeded behavior
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [lo, hi].
  int between(int lo, int hi);
  // Uniform in [0, 1) with 53 bits of precision.
  double unit();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Stateless uniform value in [0, 1) derived from a seed and a key; used where
// draws must not depend on evaluation order.
double keyed_unit(std::uint64_t seed, std::string_view key);

}  // namespace vemorph

#endif  // VEMORPH_RANDOM_HPP_
