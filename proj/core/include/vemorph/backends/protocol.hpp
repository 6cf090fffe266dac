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

#ifndef VEMORPH_BACKENDS_PROTOCOL_HPP_
#define VEMORPH_BACKENDS_PROTOCOL_HPP_

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vemorph/geometry.hpp"
#include "vemorph/image.hpp"
#include "vemorph/label.hpp"

// Wire protocol shared by every backend role. All bodies are JSON; images
// travel as base64 PNG or, for same-host deployments, as local file paths.
//
//   POST /v1/extract  {prompt}            -> {response}
//   POST /v1/detect   {image}             -> {boxes: [{x1, y1, x2, y2, score?}]}
//   POST /v1/ground   {image, text}       -> {box: {x1, y1, x2, y2}, confidence?}
//   POST /v1/inpaint  {image, mask}       -> {image}
//   POST /v1/synonym  {text}              -> {text, substitutions: [{from, to}]}
//   POST /v1/predict  {image, hypothesis} -> {label, confidence?}
//   GET  /v1/health                       -> {status: "ok", roles: [...]}
namespace vemorph::backends {

using nlohmann::json;

enum class Role { kExtract, kDetect, kGround, kInpaint, kSynonym, kPredict };

inline constexpr std::array<Role, 6> kAllRoles = {
    Role::kExtract, Role::kDetect,  Role::kGround,
    Role::kInpaint, Role::kSynonym, Role::kPredict};

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view s) noexcept;
std::string endpoint_path(Role role);

inline constexpr std::string_view kPngBase64 = "png-base64";
inline constexpr std::string_view kLocalPath = "local-path";

struct ImagePayload {
  std::string encoding{kPngBase64};
  std::string data;
  int width = 0;
  int height = 0;

  bool operator==(const ImagePayload&) const = default;
};

ImagePayload to_payload(const Image& image);
ImagePayload to_payload(const Mask& mask);
// Decodes and checks the stated dimensions. Throws SchemaViolation.
Image image_from_payload(const ImagePayload& payload);
Mask mask_from_payload(const ImagePayload& payload);

struct RawBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
  std::optional<double> score;

  BBox bbox() const noexcept { return {x1, y1, x2, y2}; }
  bool operator==(const RawBox&) const = default;
};

struct Grounding {
  RawBox box;
  std::optional<double> confidence;

  bool operator==(const Grounding&) const = default;
};

struct Substitution {
  std::string from;
  std::string to;

  bool operator==(const Substitution&) const = default;
};

struct SynonymResult {
  std::string text;
  std::vector<Substitution> substitutions;

  bool operator==(const SynonymResult&) const = default;
};

struct Prediction {
  Label label = Label::kEntailment;
  std::optional<double> confidence;

  bool operator==(const Prediction&) const = default;
};

struct Health {
  std::string status = "ok";
  std::vector<Role> roles;
  std::string metadata;
};

// A body that does not match its schema. Clients surface it as
// Error(kBackendMalformed); the service answers 400.
class SchemaViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace wire {

json encode(const ImagePayload& p);
ImagePayload decode_image(const json& j, const char* field);

json extract_request(std::string_view prompt);
std::string decode_extract_request(const json& j);
json extract_response(std::string_view response);
std::string decode_extract_response(const json& j);

json detect_request(const ImagePayload& image);
ImagePayload decode_detect_request(const json& j);
json detect_response(const std::vector<RawBox>& boxes);
std::vector<RawBox> decode_detect_response(const json& j);

struct GroundRequest {
  ImagePayload image;
  std::string text;
};
json ground_request(const GroundRequest& r);
GroundRequest decode_ground_request(const json& j);
json ground_response(const Grounding& g);
Grounding decode_ground_response(const json& j);

struct InpaintRequest {
  ImagePayload image;
  ImagePayload mask;
};
json inpaint_request(const InpaintRequest& r);
InpaintRequest decode_inpaint_request(const json& j);
json inpaint_response(const ImagePayload& image);
ImagePayload decode_inpaint_response(const json& j);

json synonym_request(std::string_view text);
std::string decode_synonym_request(const json& j);
json synonym_response(const SynonymResult& r);
SynonymResult decode_synonym_response(const json& j);

struct PredictRequest {
  ImagePayload image;
  std::string hypothesis;
};
json predict_request(const PredictRequest& r);
PredictRequest decode_predict_request(const json& j);
json predict_response(const Prediction& p);
Prediction decode_predict_response(const json& j);

json health_response(const Health& h);
Health decode_health_response(const json& j);

json error_body(std::string_view code, std::string_view message);

}  // namespace wire
}  // namespace vemorph::backends

#endif  // VEMORPH_BACKENDS_PROTOCOL_HPP_
