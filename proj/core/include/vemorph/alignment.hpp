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

#ifndef VEMORPH_ALIGNMENT_HPP_
#define VEMORPH_ALIGNMENT_HPP_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vemorph/backends/client.hpp"
#include "vemorph/geometry.hpp"
#include "vemorph/hypothesis.hpp"
#include "vemorph/image.hpp"

namespace vemorph {

struct LinkedPair {
  ObjectDescriptionUnit unit;
  BBox region;
  // Recorded from the grounder when present; not acted on.
  std::optional<double> confidence;

  bool operator==(const LinkedPair&) const = default;
};

struct SkippedUnit {
  ObjectDescriptionUnit unit;
  std::string reason;

  bool operator==(const SkippedUnit&) const = default;
};

struct AlignmentResult {
  std::vector<LinkedPair> linked;
  std::vector<BBox> unlinked;
  std::vector<SkippedUnit> skipped_units;
  // Detector output after clamping, in detector order.
  std::vector<BBox> detected;
  // Detector boxes dropped as degenerate after clamping.
  std::size_t dropped_detections = 0;

  std::vector<BBox> linked_regions() const;
  bool operator==(const AlignmentResult&) const = default;
};

struct Detections {
  std::vector<BBox> boxes;
  std::size_t dropped = 0;
};

// Backend errors propagate as vemorph::Error.
Detections detect_objects(const Image& image, const backends::BackendClient& detector);

// Throws Error(kDegenerateBox) when the grounder's box is unusable.
LinkedPair ground_unit(const Image& image, const ObjectDescriptionUnit& unit,
                       const backends::BackendClient& grounder);

// Plural units are skipped with reason "plural_unit"; degenerate or rejected
// groundings are skipped with the error's reason code. Outages and malformed
// answers propagate so the caller can skip the whole sample.
AlignmentResult align(const Image& image, std::span<const ObjectDescriptionUnit> units,
                      const backends::BackendClient& detector,
                      const backends::BackendClient& grounder, IouThreshold t);

nlohmann::json to_json(const BBox& b);
BBox bbox_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ObjectDescriptionUnit& u);
ObjectDescriptionUnit unit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AlignmentResult& a);
AlignmentResult alignment_from_json(const nlohmann::json& j);

}  // namespace vemorph

#endif  // VEMORPH_ALIGNMENT_HPP_
