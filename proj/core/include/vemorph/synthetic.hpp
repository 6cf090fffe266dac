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

#ifndef VEMORPH_SYNTHETIC_HPP_
#define VEMORPH_SYNTHETIC_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vemorph/backends/service.hpp"
#include "vemorph/geometry.hpp"
#include "vemorph/image.hpp"
#include "vemorph/label.hpp"

// A flat-color world where every object is recoverable exactly from pixels.
// It backs each protocol role with a perfect stand-in, provides a reference
// VE model, and ships deliberately broken VE models for issue accounting.
namespace vemorph::synthetic {

enum class Shape { kSquare, kCircle, kTriangle };

// The first eight are object colors; the rest are backgrounds.
enum class Color {
  kRed, kGreen, kBlue, kYellow, kCyan, kMagenta, kOrange, kPurple,
  kWhite, kGray, kBlack,
};

inline constexpr int kObjectColorCount = 8;
inline constexpr int kMaxObjects = 8;
inline constexpr ImageDims kDefaultDims{96, 96};

std::string_view to_string(Shape s) noexcept;
std::string_view to_string(Color c) noexcept;
std::optional<Shape> parse_shape(std::string_view s) noexcept;
std::optional<Color> parse_color(std::string_view s) noexcept;
Rgb rgb(Color c) noexcept;
bool is_object_color(Color c) noexcept;

struct SceneObject {
  Shape shape = Shape::kSquare;
  Color color = Color::kRed;
  BBox region;

  std::string name() const;  // "<color> <shape>"
  bool operator==(const SceneObject&) const = default;
};

struct Scene {
  ImageDims dims = kDefaultDims;
  Color background = Color::kWhite;
  std::vector<SceneObject> objects;
  std::uint64_t seed = 0;

  bool operator==(const Scene&) const = default;
};

// Objects get integer regions with a one-pixel gap to each other and to the
// image border, and unique (color, shape) pairs. Throws
// Error(kPlacementFailure) if the retry budget runs out, and Error(kConfig)
// for counts outside [0, kMaxObjects].
Scene gen_scene(std::uint64_t seed, int n_objects, ImageDims dims = kDefaultDims);

// Squares fill their region; circles and triangles are inscribed so that the
// tight bounding box of their pixels equals the region.
Image render(const Scene& scene);

struct Sample {
  std::string id;
  std::string hypothesis;
  Label label = Label::kEntailment;
  // Indices into scene.objects, in mention order.
  std::vector<std::size_t> mentioned;
  std::vector<BBox> linked;
  std::vector<BBox> unlinked;
};

// Mentions the first k objects as "a <color> <shape> is present" joined by
// " and ". Requires 1 <= k <= objects.
Sample make_sample(const Scene& scene, int k_mentioned, std::string id);

// Connected same-color regions that differ from the background, classified
// by shape. Background is the most common border color.
struct DecodedObject {
  Shape shape;
  Color color;
  BBox region;
};
std::vector<DecodedObject> decode_objects(const Image& image);
Rgb background_of(const Image& image, const Mask* ignore = nullptr);

// (color, shape) mentions in a sentence, after undoing lexicon synonyms.
std::vector<std::pair<Color, Shape>> parse_mentions(std::string_view sentence);

class PerfectDetector final : public backends::DetectModel {
 public:
  std::vector<backends::RawBox> detect(const Image& image) const override;
};

// Returns the region of the object named in the text; Error(kBackendRejected)
// when nothing matches.
class PerfectGrounder final : public backends::GroundModel {
 public:
  backends::Grounding ground(const Image& image, const std::string& text) const override;
};

// Inverts the sample grammar from the hypothesis embedded in a prompt.
class RuleExtractor final : public backends::ExtractModel {
 public:
  std::string extract(const std::string& prompt) const override;
};

// Fills white mask pixels with the background; all other pixels unchanged.
class FillInpainter final : public backends::InpaintModel {
 public:
  Image inpaint(const Image& image, const Mask& mask) const override;
};

// Entailment iff every mentioned (color, shape) is visible.
class ReferenceVe final : public backends::PredictModel {
 public:
  backends::Prediction predict(const Image& image, const std::string& hypothesis) const override;
};

class AlwaysEntailmentVe final : public backends::PredictModel {
 public:
  backends::Prediction predict(const Image&, const std::string&) const override {
    return {Label::kEntailment, std::nullopt};
  }
};

// Flips the reference answer (entailment <-> contradiction) with probability p.
// The draw is keyed on (seed, image, hypothesis), so answers do not depend on
// call order.
class RandomFlipVe final : public backends::PredictModel {
 public:
  RandomFlipVe(std::uint64_t seed, double p);

  backends::Prediction predict(const Image& image, const std::string& hypothesis) const override;
  bool flips(const Image& image, const std::string& hypothesis) const;

 private:
  std::uint64_t seed_;
  double p_;
  ReferenceVe reference_;
};

// In-process services:
//   synthetic          perfect extract/detect/ground/inpaint, lexicon synonyms,
//                      reference VE
//   identity-synonym   synonym role only, never substitutes
//   always-entailment  predict role only
//   random-flip        predict role only; params seed (default 0), p (default 0.25)
backends::ServiceRegistry standard_registry();

nlohmann::json to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

struct CorpusOptions {
  int scenes = 50;
  std::uint64_t seed = 1;
  ImageDims dims = kDefaultDims;
  int min_objects = 1;
  int max_objects = kMaxObjects;
  int max_mentioned = 3;
};

// Writes dataset.jsonl (id, image, hypothesis, label), images/<id>.png and
// scenes.json under `dir`. Returns the scenes and samples written.
struct Corpus {
  std::vector<Scene> scenes;
  std::vector<Sample> samples;
};
Corpus build_corpus(const CorpusOptions& options);
Corpus write_corpus(const std::filesystem::path& dir, const CorpusOptions& options);

}  // namespace vemorph::synthetic

#endif  // VEMORPH_SYNTHETIC_HPP_
