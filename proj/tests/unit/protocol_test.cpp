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

#include <gtest/gtest.h>

#include <cstdlib>
#include <set>

#include "test_support.hpp"
#include "vemorph/backends/protocol.hpp"
#include "vemorph/backends/service.hpp"
#include "vemorph/error.hpp"
#include "vemorph/io.hpp"
#include "vemorph/synthetic.hpp"

namespace vemorph::backends {
namespace {

using nlohmann::json;

// 8x6 white canvas with a red square covering (2,1)-(5,4).
Image fixture_image() {
  Image img({8, 6}, synthetic::rgb(synthetic::Color::kWhite));
  for (int r = 1; r < 4; ++r)
    for (int c = 2; c < 5; ++c) img.set(r, c, synthetic::rgb(synthetic::Color::kRed));
  return img;
}

struct FixtureCase {
  std::string name;
  std::string service;
  std::string method;
  std::string path;
  std::string body;
};

std::vector<FixtureCase> fixture_cases() {
  const json image = wire::encode(to_payload(fixture_image()));
  const json mask = wire::encode(to_payload(render_mask({8, 6}, {2, 1, 5, 4})));
  json bad_dims = image;
  bad_dims["width"] = 9;
  const std::string synth = "inprocess:synthetic";
  return {
      {"health", synth, "GET", "/v1/health", ""},
      {"health_predict_only", "inprocess:always-entailment", "GET", "/v1/health", ""},
      {"extract", synth, "POST", "/v1/extract",
       json{{"prompt", "Input: a red square sits\nOutput:"}}.dump()},
      {"detect", synth, "POST", "/v1/detect", json{{"image", image}}.dump()},
      {"ground", synth, "POST", "/v1/ground", json{{"image", image}, {"text", "red square"}}.dump()},
      {"inpaint", synth, "POST", "/v1/inpaint", json{{"image", image}, {"mask", mask}}.dump()},
      {"synonym", synth, "POST", "/v1/synonym", json{{"text", "young boys fishing"}}.dump()},
      {"synonym_identity", "inprocess:identity-synonym", "POST", "/v1/synonym",
       json{{"text", "young boys fishing"}}.dump()},
      {"predict_entailment", synth, "POST", "/v1/predict",
       json{{"image", image}, {"hypothesis", "a red square is present"}}.dump()},
      {"predict_contradiction", synth, "POST", "/v1/predict",
       json{{"image", image}, {"hypothesis", "a blue circle is present"}}.dump()},
      {"predict_always_entailment", "inprocess:always-entailment", "POST", "/v1/predict",
       json{{"image", image}, {"hypothesis", "a blue circle is present"}}.dump()},
      {"error_ground_no_match", synth, "POST", "/v1/ground",
       json{{"image", image}, {"text", "blue circle"}}.dump()},
      {"error_ground_missing_text", synth, "POST", "/v1/ground", json{{"image", image}}.dump()},
      {"error_invalid_json", synth, "POST", "/v1/ground", "{\"image\": "},
      {"error_detect_dims_mismatch", synth, "POST", "/v1/detect", json{{"image", bad_dims}}.dump()},
      {"error_unknown_path", synth, "POST", "/v1/segment", "{}"},
      {"error_wrong_method", synth, "GET", "/v1/ground", ""},
      {"error_role_not_served", "inprocess:always-entailment", "POST", "/v1/detect",
       json{{"image", image}}.dump()},
  };
}

fs::path fixture_dir() { return testing::source_path("core/protocol/fixtures"); }

TEST(ProtocolFixtures, Replay) {
  const auto registry = synthetic::standard_registry();
  const bool write = std::getenv("VEMORPH_WRITE_FIXTURES") != nullptr;
  for (const auto& c : fixture_cases()) {
    const auto service = registry.resolve(c.service);
    const HttpResponse got = service->handle({c.method, c.path, c.body});
    const fs::path file = fixture_dir() / (c.name + ".json");
    if (write) {
      json fx = {{"service", c.service},
                 {"request", {{"method", c.method}, {"path", c.path}, {"body", c.body}}},
                 {"response", {{"status", got.status}, {"body", got.body}}}};
      write_atomic(file, fx.dump(2) + "\n");
      continue;
    }
    ASSERT_TRUE(fs::exists(file)) << file;
    const json fx = json::parse(read_text(file));
    EXPECT_EQ(fx["request"]["body"].get<std::string>(), c.body) << c.name;
    EXPECT_EQ(got.status, fx["response"]["status"].get<int>()) << c.name;
    EXPECT_EQ(got.body, fx["response"]["body"].get<std::string>()) << c.name;
  }
}

TEST(ProtocolFixtures, EveryFixtureReplaysFromDisk) {
  const auto registry = synthetic::standard_registry();
  std::set<std::string> ok_paths;
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(fixture_dir())) {
    if (entry.path().extension() != ".json") continue;
    ++n;
    const json fx = json::parse(read_text(entry.path()));
    const auto service = registry.resolve(fx["service"].get<std::string>());
    const auto& req = fx["request"];
    const HttpResponse got = service->handle({req["method"].get<std::string>(),
                                              req["path"].get<std::string>(),
                                              req["body"].get<std::string>()});
    EXPECT_EQ(got.status, fx["response"]["status"].get<int>()) << entry.path();
    EXPECT_EQ(got.body, fx["response"]["body"].get<std::string>()) << entry.path();
    if (got.status == 200) ok_paths.insert(req["path"].get<std::string>());
    if (got.status >= 400) {
      const json body = json::parse(got.body);
      EXPECT_TRUE(body["error"]["code"].is_string()) << entry.path();
    }
  }
  EXPECT_EQ(n, fixture_cases().size());
  for (Role r : kAllRoles) EXPECT_TRUE(ok_paths.count(endpoint_path(r))) << to_string(r);
  EXPECT_TRUE(ok_paths.count("/v1/health"));
}

TEST(ProtocolFixtures, SemanticContent) {
  const auto registry = synthetic::standard_registry();
  const auto service = registry.resolve("inprocess:synthetic");
  const json image = wire::encode(to_payload(fixture_image()));

  auto call = [&](Role role, const json& body) {
    const auto r = service->handle({"POST", endpoint_path(role), body.dump()});
    EXPECT_EQ(r.status, 200) << r.body;
    return json::parse(r.body);
  };

  const auto boxes = wire::decode_detect_response(call(Role::kDetect, {{"image", image}}));
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_EQ(boxes[0].bbox(), (BBox{2, 1, 5, 4}));

  const auto g = wire::decode_ground_response(call(Role::kGround, {{"image", image}, {"text", "a red square"}}));
  EXPECT_EQ(g.box.bbox(), (BBox{2, 1, 5, 4}));

  const json mask = wire::encode(to_payload(render_mask({8, 6}, {2, 1, 5, 4})));
  const Image filled = image_from_payload(
      wire::decode_inpaint_response(call(Role::kInpaint, {{"image", image}, {"mask", mask}})));
  EXPECT_EQ(filled, Image({8, 6}, synthetic::rgb(synthetic::Color::kWhite)));

  const auto syn = wire::decode_synonym_response(call(Role::kSynonym, {{"text", "young boys fishing"}}));
  EXPECT_EQ(syn.text, "young lads fishing");
  ASSERT_EQ(syn.substitutions.size(), 1u);
  EXPECT_EQ(syn.substitutions[0], (Substitution{"boys", "lads"}));

  const auto ex = parse_extraction(wire::decode_extract_response(
      call(Role::kExtract, {{"prompt", "Input: a red square sits\nOutput:"}})));
  ASSERT_EQ(ex.size(), 1u);
  EXPECT_EQ(ex[0], (ExtractionPair{"red square", "sits"}));
}

TEST(Wire, ResponsesValidate) {
  EXPECT_THROW(wire::decode_predict_response(json{{"label", "maybe"}}), SchemaViolation);
  EXPECT_THROW(wire::decode_predict_response(json{{"label", "neutral"}, {"confidence", 1.5}}),
               SchemaViolation);
  EXPECT_EQ(wire::decode_predict_response(json{{"label", "neutral"}, {"confidence", 0.5}}),
            (Prediction{Label::kNeutral, 0.5}));
  EXPECT_THROW(wire::decode_detect_response(json{{"boxes", {{{"x1", 0}, {"y1", 0}, {"x2", "1"}, {"y2", 1}}}}}),
               SchemaViolation);
  EXPECT_THROW(wire::decode_detect_response(json{{"boxes", 3}}), SchemaViolation);
  EXPECT_THROW(wire::decode_detect_response(json::array()), SchemaViolation);
  EXPECT_THROW(wire::decode_ground_response(json{{"box", {{"x1", 0}, {"y1", 0}, {"x2", 1}}}}),
               SchemaViolation);
  EXPECT_THROW(wire::decode_synonym_response(json{{"text", "a"}, {"substitutions", {{{"from", ""}, {"to", "b"}}}}}),
               SchemaViolation);
  EXPECT_THROW(wire::decode_health_response(json{{"status", "ok"}, {"roles", {"paint"}}}), SchemaViolation);
  EXPECT_THROW(wire::decode_extract_response(json{{"response", 5}}), SchemaViolation);
}

TEST(Wire, ImagePayloadChecks) {
  const ImagePayload p = to_payload(fixture_image());
  EXPECT_EQ(image_from_payload(p), fixture_image());
  ImagePayload wrong = p;
  wrong.height = 7;
  EXPECT_THROW(image_from_payload(wrong), SchemaViolation);
  ImagePayload junk = p;
  junk.data = "AAAA";
  EXPECT_THROW(image_from_payload(junk), SchemaViolation);
  json j = wire::encode(p);
  j["encoding"] = "jpeg-base64";
  EXPECT_THROW(wire::decode_image(json{{"image", j}}, "image"), SchemaViolation);
  j = wire::encode(p);
  j["width"] = 0;
  EXPECT_THROW(wire::decode_image(json{{"image", j}}, "image"), SchemaViolation);
  j["width"] = 2.5;
  EXPECT_THROW(wire::decode_image(json{{"image", j}}, "image"), SchemaViolation);
}

TEST(Wire, LocalPathPayload) {
  testing::TempDir dir("payload");
  write_atomic(dir / "img.png", encode_png(fixture_image()));
  const ImagePayload p{std::string(kLocalPath), (dir / "img.png").string(), 8, 6};
  EXPECT_EQ(image_from_payload(p), fixture_image());
  const ImagePayload missing{std::string(kLocalPath), (dir / "nope.png").string(), 8, 6};
  EXPECT_THROW(image_from_payload(missing), SchemaViolation);
}

TEST(Wire, RoundTrips) {
  const std::vector<RawBox> boxes{{1, 2, 3, 4, 0.5}, {0, 0, 8, 6, std::nullopt}};
  EXPECT_EQ(wire::decode_detect_response(wire::detect_response(boxes)), boxes);
  const Grounding g{{1, 1, 2, 2, std::nullopt}, 0.25};
  EXPECT_EQ(wire::decode_ground_response(wire::ground_response(g)), g);
  const SynonymResult s{"a lad", {{"boy", "lad"}}};
  EXPECT_EQ(wire::decode_synonym_response(wire::synonym_response(s)), s);
  const Health h{"ok", {Role::kDetect, Role::kPredict}, "meta"};
  const Health back = wire::decode_health_response(wire::health_response(h));
  EXPECT_EQ(back.roles, h.roles);
  EXPECT_EQ(back.metadata, "meta");
  EXPECT_EQ(wire::error_body("x", "y").dump(), R"({"error":{"code":"x","message":"y"}})");
}

TEST(Roles, Names) {
  for (Role r : kAllRoles) EXPECT_EQ(parse_role(to_string(r)), r);
  EXPECT_FALSE(parse_role("segment").has_value());
  EXPECT_EQ(endpoint_path(Role::kInpaint), "/v1/inpaint");
}

}  // namespace
}  // namespace vemorph::backends
