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

#include <algorithm>
#include <tuple>

#include "test_support.hpp"
#include "vemorph/alignment.hpp"
#include "vemorph/error.hpp"
#include "vemorph/synthetic.hpp"

namespace vemorph {
namespace {

using backends::Role;
using testing::synthetic_client;
using testing::units_for;

class FixedDetector final : public backends::DetectModel {
 public:
  explicit FixedDetector(std::vector<backends::RawBox> boxes) : boxes_(std::move(boxes)) {}
  std::vector<backends::RawBox> detect(const Image&) const override { return boxes_; }

 private:
  std::vector<backends::RawBox> boxes_;
};

class FixedGrounder final : public backends::GroundModel {
 public:
  explicit FixedGrounder(backends::RawBox box) : box_(box) {}
  backends::Grounding ground(const Image&, const std::string&) const override {
    return {box_, 0.75};
  }

 private:
  backends::RawBox box_;
};

std::vector<BBox> sorted(std::vector<BBox> v) {
  std::sort(v.begin(), v.end(), [](const BBox& a, const BBox& b) {
    return std::tie(a.x1, a.y1, a.x2, a.y2) < std::tie(b.x1, b.y1, b.x2, b.y2);
  });
  return v;
}

TEST(Alignment, LinksMentionedObjects) {
  const auto scene = synthetic::gen_scene(21, 3);
  const auto sample = synthetic::make_sample(scene, 2, "s");
  const Image img = synthetic::render(scene);
  const auto units = units_for(sample.hypothesis);
  ASSERT_EQ(units.size(), 2u);
  const auto a = align(img, units, synthetic_client(Role::kDetect),
                       synthetic_client(Role::kGround), IouThreshold{});
  ASSERT_EQ(a.linked.size(), 2u);
  EXPECT_EQ(a.linked[0].region, scene.objects[0].region);
  EXPECT_EQ(a.linked[1].region, scene.objects[1].region);
  ASSERT_EQ(a.unlinked.size(), 1u);
  EXPECT_EQ(a.unlinked[0], scene.objects[2].region);
  EXPECT_EQ(a.detected.size(), 3u);
  EXPECT_TRUE(a.skipped_units.empty());
}

TEST(Alignment, EmptySceneSkipsEveryUnit) {
  const Image img = synthetic::render(synthetic::gen_scene(3, 0));
  const auto units = units_for("a red square is present");
  const auto a = align(img, units, synthetic_client(Role::kDetect),
                       synthetic_client(Role::kGround), IouThreshold{});
  EXPECT_TRUE(a.linked.empty());
  EXPECT_TRUE(a.unlinked.empty());
  EXPECT_TRUE(a.detected.empty());
  ASSERT_EQ(a.skipped_units.size(), 1u);
  EXPECT_EQ(a.skipped_units[0].reason, "grounding_backend_rejected");
}

TEST(Alignment, ClampsAndDropsDetections) {
  backends::ModelSet det;
  det.detect = std::make_shared<FixedDetector>(std::vector<backends::RawBox>{
      {-5, -5, 10, 10, 0.9}, {200, 200, 300, 300, 0.5}, {30, 30, 30, 40, std::nullopt}});
  backends::ModelSet gr;
  gr.ground = std::make_shared<FixedGrounder>(backends::RawBox{0, 0, 10, 10, std::nullopt});
  const Image img({96, 96}, Rgb{255, 255, 255});
  const auto units = units_for("a red square is present");
  const auto a = align(img, units, testing::client_for(Role::kDetect, det),
                       testing::client_for(Role::kGround, gr), IouThreshold{});
  ASSERT_EQ(a.detected.size(), 1u);
  EXPECT_EQ(a.detected[0], (BBox{0, 0, 10, 10}));
  EXPECT_EQ(a.dropped_detections, 2u);
  ASSERT_EQ(a.linked.size(), 1u);
  EXPECT_EQ(a.linked[0].confidence, 0.75);
  EXPECT_TRUE(a.unlinked.empty());
}

TEST(Alignment, DegenerateGroundingSkipsUnit) {
  backends::ModelSet det;
  det.detect = std::make_shared<FixedDetector>(std::vector<backends::RawBox>{});
  backends::ModelSet gr;
  gr.ground = std::make_shared<FixedGrounder>(backends::RawBox{120, 120, 130, 130, std::nullopt});
  const Image img({96, 96}, Rgb{255, 255, 255});
  const auto a = align(img, units_for("a red square is present"),
                       testing::client_for(Role::kDetect, det),
                       testing::client_for(Role::kGround, gr), IouThreshold{});
  EXPECT_TRUE(a.linked.empty());
  ASSERT_EQ(a.skipped_units.size(), 1u);
  EXPECT_EQ(a.skipped_units[0].reason, "grounding_degenerate_box");
}

TEST(Alignment, PluralUnitsAreNotGrounded) {
  ObjectDescriptionUnit u;
  u.object = "dogs";
  u.text = "dogs";
  u.plural = true;
  const std::vector<ObjectDescriptionUnit> units{u};
  const Image img({8, 8}, Rgb{255, 255, 255});
  const auto a = align(img, units, synthetic_client(Role::kDetect),
                       synthetic_client(Role::kGround), IouThreshold{});
  ASSERT_EQ(a.skipped_units.size(), 1u);
  EXPECT_EQ(a.skipped_units[0].reason, "plural_unit");
}

TEST(Alignment, OutagePropagates) {
  backends::ModelSet none;
  none.detect = std::make_shared<FixedDetector>(std::vector<backends::RawBox>{});
  const Image img({8, 8}, Rgb{255, 255, 255});
  try {
    align(img, units_for("a red square is present"), testing::client_for(Role::kDetect, none),
          testing::client_for(Role::kGround, none), IouThreshold{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBackendUnavailable);
  }
}

TEST(Alignment, JsonRoundTrip) {
  const auto scene = synthetic::gen_scene(8, 5);
  const auto sample = synthetic::make_sample(scene, 2, "s");
  auto a = align(synthetic::render(scene), units_for(sample.hypothesis),
                 synthetic_client(Role::kDetect), synthetic_client(Role::kGround),
                 IouThreshold{});
  a.linked[0].confidence = 0.5;
  a.skipped_units.push_back({a.linked[1].unit, "plural_unit"});
  a.dropped_detections = 3;
  EXPECT_EQ(alignment_from_json(to_json(a)), a);
  EXPECT_EQ(alignment_from_json(nlohmann::json::parse(to_json(a).dump())), a);
  EXPECT_THROW(alignment_from_json(nlohmann::json::object()), Error);
}

TEST(Alignment, LinkedAndUnlinkedInvariantsOnCorpus) {
  synthetic::CorpusOptions opt;
  opt.scenes = 100;
  opt.seed = 17;
  const auto corpus = synthetic::build_corpus(opt);
  const IouThreshold t;
  for (std::size_t i = 0; i < corpus.scenes.size(); ++i) {
    const auto& sample = corpus.samples[i];
    const auto a = align(synthetic::render(corpus.scenes[i]), units_for(sample.hypothesis),
                         synthetic_client(Role::kDetect), synthetic_client(Role::kGround), t);
    EXPECT_EQ(a.linked_regions(), sample.linked) << sample.id;
    EXPECT_EQ(sorted(a.unlinked), sorted(sample.unlinked)) << sample.id;
    const auto linked = a.linked_regions();
    std::size_t unlinked = 0;
    for (const auto& d : a.detected) {
      if (testing::naive_unlinked(d, linked, t.value())) ++unlinked;
    }
    EXPECT_EQ(unlinked, a.unlinked.size()) << sample.id;
  }
}

}  // namespace
}  // namespace vemorph
