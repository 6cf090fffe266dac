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

#include "vemorph/backends/protocol.hpp"

#include <cmath>

#include <fmt/format.h>

#include "vemorph/error.hpp"
#include "vemorph/io.hpp"

namespace vemorph::backends {
namespace {

[[noreturn]] void violation(std::string message) { throw SchemaViolation(std::move(message)); }

const json& field(const json& j, const char* name) {
  if (!j.is_object()) violation("body is not a JSON object");
  auto it = j.find(name);
  if (it == j.end()) violation(fmt::format("missing field '{}'", name));
  return *it;
}

std::string string_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string()) violation(fmt::format("field '{}' is not a string", name));
  return v.get<std::string>();
}

double number_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number()) violation(fmt::format("field '{}' is not a number", name));
  const double d = v.get<double>();
  if (!std::isfinite(d)) violation(fmt::format("field '{}' is not finite", name));
  return d;
}

std::optional<double> probability_field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name) || j.at(name).is_null()) return std::nullopt;
  const double d = number_field(j, name);
  if (d < 0.0 || d > 1.0) violation(fmt::format("field '{}' is outside [0, 1]", name));
  return d;
}

json encode_box(const RawBox& b) {
  json j = {{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}};
  if (b.score) j["score"] = *b.score;
  return j;
}

RawBox decode_box(const json& j) {
  return {number_field(j, "x1"), number_field(j, "y1"), number_field(j, "x2"),
          number_field(j, "y2"), probability_field(j, "score")};
}

std::vector<std::uint8_t> payload_bytes(const ImagePayload& p) {
  try {
    if (p.encoding == kPngBase64) return base64_decode(p.data);
    if (p.encoding == kLocalPath) return read_bytes(p.data);
  } catch (const Error& e) {
    violation(fmt::format("unreadable image payload: {}", e.what()));
  }
  violation(fmt::format("unknown image encoding '{}'", p.encoding));
}

}  // namespace

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::kExtract: return "extract";
    case Role::kDetect: return "detect";
    case Role::kGround: return "ground";
    case Role::kInpaint: return "inpaint";
    case Role::kSynonym: return "synonym";
    case Role::kPredict: return "predict";
  }
  return "extract";
}

std::optional<Role> parse_role(std::string_view s) noexcept {
  for (Role r : kAllRoles) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

std::string endpoint_path(Role role) { return fmt::format("/v1/{}", to_string(role)); }

ImagePayload to_payload(const Image& image) {
  return {std::string(kPngBase64), base64_encode(encode_png(image)), image.dims().width,
          image.dims().height};
}

ImagePayload to_payload(const Mask& mask) {
  return {std::string(kPngBase64), base64_encode(encode_png(mask)), mask.dims().width,
          mask.dims().height};
}

Image image_from_payload(const ImagePayload& p) {
  Image image;
  try {
    image = decode_image(payload_bytes(p));
  } catch (const Error& e) {
    violation(fmt::format("undecodable image: {}", e.what()));
  }
  if (image.dims() != ImageDims{p.width, p.height}) {
    violation(fmt::format("image is {}x{} but payload states {}x{}", image.dims().width,
                          image.dims().height, p.width, p.height));
  }
  return image;
}

Mask mask_from_payload(const ImagePayload& p) {
  Mask mask;
  try {
    mask = decode_mask(payload_bytes(p));
  } catch (const Error& e) {
    violation(fmt::format("undecodable mask: {}", e.what()));
  }
  if (mask.dims() != ImageDims{p.width, p.height}) {
    violation(fmt::format("mask is {}x{} but payload states {}x{}", mask.dims().width,
                          mask.dims().height, p.width, p.height));
  }
  return mask;
}

namespace wire {

json encode(const ImagePayload& p) {
  return {{"encoding", p.encoding}, {"data", p.data}, {"width", p.width}, {"height", p.height}};
}

ImagePayload decode_image(const json& j, const char* name) {
  const json& v = field(j, name);
  ImagePayload p;
  p.encoding = string_field(v, "encoding");
  if (p.encoding != kPngBase64 && p.encoding != kLocalPath) {
    violation(fmt::format("unknown image encoding '{}'", p.encoding));
  }
  p.data = string_field(v, "data");
  const json& w = field(v, "width");
  const json& h = field(v, "height");
  if (!w.is_number_integer() || !h.is_number_integer() || w.get<long long>() < 1 ||
      h.get<long long>() < 1 || w.get<long long>() > 1 << 16 || h.get<long long>() > 1 << 16) {
    violation("image width/height must be positive integers");
  }
  p.width = w.get<int>();
  p.height = h.get<int>();
  return p;
}

json extract_request(std::string_view prompt) { return {{"prompt", prompt}}; }
std::string decode_extract_request(const json& j) { return string_field(j, "prompt"); }
json extract_response(std::string_view response) { return {{"response", response}}; }
std::string decode_extract_response(const json& j) { return string_field(j, "response"); }

json detect_request(const ImagePayload& image) { return {{"image", encode(image)}}; }
ImagePayload decode_detect_request(const json& j) { return decode_image(j, "image"); }

json detect_response(const std::vector<RawBox>& boxes) {
  json arr = json::array();
  for (const auto& b : boxes) arr.push_back(encode_box(b));
  return {{"boxes", arr}};
}

std::vector<RawBox> decode_detect_response(const json& j) {
  const json& arr = field(j, "boxes");
  if (!arr.is_array()) violation("field 'boxes' is not an array");
  std::vector<RawBox> boxes;
  for (const auto& b : arr) boxes.push_back(decode_box(b));
  return boxes;
}

json ground_request(const GroundRequest& r) {
  return {{"image", encode(r.image)}, {"text", r.text}};
}

GroundRequest decode_ground_request(const json& j) {
  return {decode_image(j, "image"), string_field(j, "text")};
}

json ground_response(const Grounding& g) {
  json box = encode_box(g.box);
  box.erase("score");
  json j = {{"box", box}};
  if (g.confidence) j["confidence"] = *g.confidence;
  return j;
}

Grounding decode_ground_response(const json& j) {
  RawBox box = decode_box(field(j, "box"));
  box.score.reset();
  return {box, probability_field(j, "confidence")};
}

json inpaint_request(const InpaintRequest& r) {
  return {{"image", encode(r.image)}, {"mask", encode(r.mask)}};
}

InpaintRequest decode_inpaint_request(const json& j) {
  return {decode_image(j, "image"), decode_image(j, "mask")};
}

json inpaint_response(const ImagePayload& image) { return {{"image", encode(image)}}; }
ImagePayload decode_inpaint_response(const json& j) { return decode_image(j, "image"); }

json synonym_request(std::string_view text) { return {{"text", text}}; }
std::string decode_synonym_request(const json& j) { return string_field(j, "text"); }

json synonym_response(const SynonymResult& r) {
  json subs = json::array();
  for (const auto& s : r.substitutions) subs.push_back({{"from", s.from}, {"to", s.to}});
  return {{"text", r.text}, {"substitutions", subs}};
}

SynonymResult decode_synonym_response(const json& j) {
  SynonymResult r;
  r.text = string_field(j, "text");
  const json& subs = field(j, "substitutions");
  if (!subs.is_array()) violation("field 'substitutions' is not an array");
  for (const auto& s : subs) {
    Substitution sub{string_field(s, "from"), string_field(s, "to")};
    if (sub.from.empty() || sub.to.empty()) violation("empty substitution word");
    r.substitutions.push_back(std::move(sub));
  }
  return r;
}

json predict_request(const PredictRequest& r) {
  return {{"image", encode(r.image)}, {"hypothesis", r.hypothesis}};
}

PredictRequest decode_predict_request(const json& j) {
  return {decode_image(j, "image"), string_field(j, "hypothesis")};
}

json predict_response(const Prediction& p) {
  json j = {{"label", to_string(p.label)}};
  if (p.confidence) j["confidence"] = *p.confidence;
  return j;
}

Prediction decode_predict_response(const json& j) {
  const std::string label = string_field(j, "label");
  auto parsed = parse_label(label);
  if (!parsed) violation(fmt::format("unknown label '{}'", label));
  return {*parsed, probability_field(j, "confidence")};
}

json health_response(const Health& h) {
  json roles = json::array();
  for (Role r : h.roles) roles.push_back(to_string(r));
  json j = {{"status", h.status}, {"roles", roles}};
  if (!h.metadata.empty()) j["metadata"] = h.metadata;
  return j;
}

Health decode_health_response(const json& j) {
  Health h;
  h.status = string_field(j, "status");
  const json& roles = field(j, "roles");
  if (!roles.is_array()) violation("field 'roles' is not an array");
  for (const auto& r : roles) {
    if (!r.is_string()) violation("role is not a string");
    auto role = parse_role(r.get<std::string>());
    if (!role) violation(fmt::format("unknown role '{}'", r.get<std::string>()));
    h.roles.push_back(*role);
  }
  if (j.contains("metadata") && j["metadata"].is_string()) {
    h.metadata = j["metadata"].get<std::string>();
  }
  return h;
}

json error_body(std::string_view code, std::string_view message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace wire
}  // namespace vemorph::backends
