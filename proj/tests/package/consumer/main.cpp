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


#include <fmt/format.h>

#include "vemorph/geometry.hpp"
#include "vemorph/mr_engine.hpp"

int main() {
  const vemorph::BBox a{0, 0, 10, 10};
  const vemorph::BBox b{5, 0, 15, 10};
  const auto mask = vemorph::render_mask({8, 8}, {2, 2, 6, 6});
  fmt::print("iou={:.6f} mask={} mr2={}\n", vemorph::iou(a, b), mask.white_count(),
             vemorph::to_string(vemorph::oracle_for(vemorph::MrKind::kMr2)));
  return 0;
}
