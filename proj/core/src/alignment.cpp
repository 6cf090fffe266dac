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

#include "vemorph/alignment.hpp"

#include <fmt/format.h>

#include "vemorph/error.hpp"

namespace vemorph {

using nlohmann::json;

std::vector<BBox> AlignmentResult::linked_regions() const {
  std::vector<BBox> out;
  out.reserve(linked.size());
  for (const auto& l : linked) out.push_back(l.region);
  return out;
}

Detections detect_objects(const Image& image, const backends::BackendClient& detector) {
  Detections out;
  for (const auto& raw : detector.call_detect(image)) {
    try {
      out.boxes.push_back(clamp_to_image(raw.bbox(), image.dims()));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateBox) throw;
      ++out.dropped;
    }
  }
  return out;
}

LinkedPair ground_unit(const Image& image, const ObjectDescriptionUnit& unit,
                       const backends::BackendClient& grounder) {
  const backends::Grounding g = grounder.call_ground(image, unit.text);
  return {unit, clamp_to_image(g.box.bbox(), image.dims()), g.confidence};
}

AlignmentResult align(const Image& image, std::span<const ObjectDescriptionUnit> units,
                      const backends::BackendClient& detector,
                      const backends::BackendClient& grounder, IouThreshold t) {
  AlignmentResult result;
  Detections detections = detect_objects(image, detector);
  result.detected = std::move(detections.boxes);
  result.dropped_detections = detections.dropped;

  for (const auto& unit : units) {
    if (unit.plural) {
      result.skipped_units.push_back({unit, "plural_unit"});
      continue;
    }
    try {
      result.linked.push_back(ground_unit(image, unit, grounder));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateBox && e.code() != ErrorCode::kBackendRejected) {
        throw;
      }
      result.skipped_units.push_back({unit, fmt::format("grounding_{}", e.reason())});
    }
  }

  const auto linked = result.linked_regions();
  for (const auto& box : result.detected) {
    if (is_unlinked(box, linked, t)) result.unlinked.push_back(box);
  }
  return result;
}

json to_json(const BBox& b) { return {{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}}; }

BBox bbox_from_json(const json& j) {
  return {j.at("x1").get<double>(), j.at("y1").get<double>(), j.at("x2").get<double>(),
          j.at("y2").get<double>()};
}

json to_json(const ObjectDescriptionUnit& u) {
  json j = {{"object", u.object},
            {"property", u.property},
            {"object_index", u.object_index},
            {"text", u.text},
            {"plural", u.plural}};
  j["property_index"] = u.property_index ? json(*u.property_index) : json(nullptr);
  return j;
}

ObjectDescriptionUnit unit_from_json(const json& j) {
  ObjectDescriptionUnit u;
  u.object = j.at("object").get<std::string>();
  u.property = j.at("property").get<std::string>();
  u.object_index = j.at("object_index").get<std::size_t>();
  if (!j.at("property_index").is_null()) {
    u.property_index = j.at("property_index").get<std::size_t>();
  }
  u.text = j.at("text").get<std::string>();
  u.plural = j.at("plural").get<bool>();
  return u;
}

json to_json(const AlignmentResult& a) {
  json linked = json::array();
  for (const auto& l : a.linked) {
    json entry = {{"unit", to_json(l.unit)}, {"region", to_json(l.region)}};
    if (l.confidence) entry["confidence"] = *l.confidence;
    linked.push_back(std::move(entry));
  }
  json unlinked = json::array();
  for (const auto& b : a.unlinked) unlinked.push_back(to_json(b));
  json skipped = json::array();
  for (const auto& s : a.skipped_units) {
    skipped.push_back({{"unit", to_json(s.unit)}, {"reason", s.reason}});
  }
  json detected = json::array();
  for (const auto& b : a.detected) detected.push_back(to_json(b));
  return {{"linked", linked},
          {"unlinked", unlinked},
          {"skipped_units", skipped},
          {"detected", detected},
          {"dropped_detections", a.dropped_detections}};
}

AlignmentResult alignment_from_json(const json& j) {
  try {
    AlignmentResult a;
    for (const auto& l : j.at("linked")) {
      LinkedPair p{unit_from_json(l.at("unit")), bbox_from_json(l.at("region")), std::nullopt};
      if (l.contains("confidence")) p.confidence = l["confidence"].get<double>();
      a.linked.push_back(std::move(p));
    }
    for (const auto& b : j.at("unlinked")) a.unlinked.push_back(bbox_from_json(b));
    for (const auto& s : j.at("skipped_units")) {
      a.skipped_units.push_back({unit_from_json(s.at("unit")), s.at("reason").get<std::string>()});
    }
    for (const auto& b : j.at("detected")) a.detected.push_back(bbox_from_json(b));
    a.dropped_detections = j.at("dropped_detections").get<std::size_t>();
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, fmt::format("bad alignment record: {}", e.what()));
  }
}

}  // namespace vemorph
