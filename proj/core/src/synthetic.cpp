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

#include "vemorph/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <queue>

#include <fmt/format.h>

#include "vemorph/error.hpp"
#include "vemorph/hypothesis.hpp"
#include "vemorph/io.hpp"
#include "vemorph/random.hpp"
#include "vemorph/text.hpp"

namespace vemorph::synthetic {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 3> kShapeNames = {"square", "circle", "triangle"};
constexpr std::array<std::string_view, 11> kColorNames = {
    "red", "green", "blue", "yellow", "cyan", "magenta",
    "orange", "purple", "white", "gray", "black"};
constexpr std::array<Rgb, 11> kPalette = {{
    {220, 30, 30},  {30, 170, 60},   {40, 70, 220},  {240, 220, 40},
    {40, 220, 230}, {220, 40, 200},  {250, 140, 20}, {120, 50, 170},
    {255, 255, 255}, {128, 128, 128}, {0, 0, 0},
}};
constexpr std::array<Color, 3> kBackgrounds = {Color::kWhite, Color::kGray, Color::kBlack};

constexpr int kMinSide = 8;
constexpr int kMaxSide = 20;
constexpr int kPlacementAttempts = 400;
constexpr int kSceneRestarts = 20;

bool covers(Shape shape, int w, int h, int dc, int dr) {
  switch (shape) {
    case Shape::kSquare:
      return true;
    case Shape::kCircle: {
      const double nx = (dc - (w - 1) / 2.0) / (w / 2.0);
      const double ny = (dr - (h - 1) / 2.0) / (h / 2.0);
      return nx * nx + ny * ny <= 1.0;
    }
    case Shape::kTriangle:
      // Right triangle with its right angle at the bottom-left corner.
      return static_cast<long>(dc) * (h - 1) <= static_cast<long>(dr) * (w - 1);
  }
  return false;
}

// Regions with at least one free pixel between them.
bool separated(const BBox& a, const BBox& b) {
  return a.x2 + 1 <= b.x1 || b.x2 + 1 <= a.x1 || a.y2 + 1 <= b.y1 || b.y2 + 1 <= a.y1;
}

const std::map<std::string, std::string>& reverse_lexicon() {
  static const std::map<std::string, std::string> rev = [] {
    std::map<std::string, std::string> m;
    for (const auto& [from, to] : backends::LexiconSynonymizer::builtin().entries()) {
      m.emplace(text::to_lower(to), from);
    }
    return m;
  }();
  return rev;
}

std::vector<std::string> canonical_words(std::string_view sentence) {
  std::vector<std::string> words;
  for (const auto& raw : text::split_words(sentence)) {
    std::string w;
    for (char c : text::to_lower(raw)) {
      if (std::isalnum(static_cast<unsigned char>(c))) w += c;
    }
    if (w.empty()) continue;
    if (auto it = reverse_lexicon().find(w); it != reverse_lexicon().end()) w = it->second;
    words.push_back(std::move(w));
  }
  return words;
}

std::optional<Color> color_of(Rgb c) {
  for (std::size_t i = 0; i < kPalette.size(); ++i) {
    if (kPalette[i] == c) return static_cast<Color>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Shape s) noexcept { return kShapeNames[static_cast<int>(s)]; }
std::string_view to_string(Color c) noexcept { return kColorNames[static_cast<int>(c)]; }

std::optional<Shape> parse_shape(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kShapeNames.size(); ++i) {
    if (kShapeNames[i] == s) return static_cast<Shape>(i);
  }
  return std::nullopt;
}

std::optional<Color> parse_color(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kColorNames.size(); ++i) {
    if (kColorNames[i] == s) return static_cast<Color>(i);
  }
  return std::nullopt;
}

Rgb rgb(Color c) noexcept { return kPalette[static_cast<int>(c)]; }
bool is_object_color(Color c) noexcept { return static_cast<int>(c) < kObjectColorCount; }

std::string SceneObject::name() const {
  return fmt::format("{} {}", to_string(color), to_string(shape));
}

Scene gen_scene(std::uint64_t seed, int n_objects, ImageDims dims) {
  if (n_objects < 0 || n_objects > kMaxObjects) {
    throw Error(ErrorCode::kConfig,
                fmt::format("object count {} outside [0, {}]", n_objects, kMaxObjects));
  }
  if (!dims.valid()) throw Error(ErrorCode::kConfig, "scene dimensions must be positive");
  Rng rng(seed);
  Scene scene;
  scene.dims = dims;
  scene.seed = seed;
  scene.background = kBackgrounds[rng.below(kBackgrounds.size())];

  std::vector<std::pair<Color, Shape>> combos;
  for (int c = 0; c < kObjectColorCount; ++c) {
    for (int s = 0; s < 3; ++s) combos.emplace_back(static_cast<Color>(c), static_cast<Shape>(s));
  }
  rng.shuffle(combos);

  const int max_w = std::min(kMaxSide, dims.width - 2);
  const int max_h = std::min(kMaxSide, dims.height - 2);
  for (int restart = 0; restart < kSceneRestarts; ++restart) {
    scene.objects.clear();
    for (int i = 0; i < n_objects; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
        if (max_w < kMinSide || max_h < kMinSide) break;
        const int w = rng.between(kMinSide, max_w);
        // Aspect ratio stays within 2:1 so inscribed shapes touch every side.
        const int h_lo = std::max(kMinSide, (w + 1) / 2);
        const int h_hi = std::min(max_h, 2 * w);
        if (h_lo > h_hi) continue;
        const int h = rng.between(h_lo, h_hi);
        const int x = rng.between(1, dims.width - 1 - w);
        const int y = rng.between(1, dims.height - 1 - h);
        const BBox region{double(x), double(y), double(x + w), double(y + h)};
        const bool clear = std::all_of(scene.objects.begin(), scene.objects.end(),
                                       [&](const SceneObject& o) { return separated(o.region, region); });
        if (!clear) continue;
        scene.objects.push_back({combos[i].second, combos[i].first, region});
        placed = true;
      }
      if (!placed) break;
    }
    if (static_cast<int>(scene.objects.size()) == n_objects) return scene;
  }
  throw Error(ErrorCode::kPlacementFailure,
              fmt::format("cannot place {} separated objects in {}x{} (seed {})", n_objects,
                          dims.width, dims.height, seed));
}

Image render(const Scene& scene) {
  Image image(scene.dims, rgb(scene.background));
  for (const auto& o : scene.objects) {
    const int x = static_cast<int>(o.region.x1);
    const int y = static_cast<int>(o.region.y1);
    const int w = static_cast<int>(o.region.x2) - x;
    const int h = static_cast<int>(o.region.y2) - y;
    for (int dr = 0; dr < h; ++dr) {
      for (int dc = 0; dc < w; ++dc) {
        if (covers(o.shape, w, h, dc, dr)) image.set(y + dr, x + dc, rgb(o.color));
      }
    }
  }
  return image;
}

Sample make_sample(const Scene& scene, int k_mentioned, std::string id) {
  if (k_mentioned < 1 || k_mentioned > static_cast<int>(scene.objects.size())) {
    throw Error(ErrorCode::kConfig,
                fmt::format("cannot mention {} of {} objects", k_mentioned, scene.objects.size()));
  }
  Sample s;
  s.id = std::move(id);
  std::vector<std::string> clauses;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (static_cast<int>(i) < k_mentioned) {
      clauses.push_back(fmt::format("a {} is present", scene.objects[i].name()));
      s.mentioned.push_back(i);
      s.linked.push_back(scene.objects[i].region);
    } else {
      s.unlinked.push_back(scene.objects[i].region);
    }
  }
  s.hypothesis = text::join(clauses, " and ");
  return s;
}

Rgb background_of(const Image& image, const Mask* ignore) {
  const ImageDims d = image.dims();
  std::map<std::uint32_t, std::pair<std::size_t, Rgb>> counts;
  auto visit = [&](int r, int c) {
    if (ignore && ignore->white(r, c)) return;
    const Rgb px = image.at(r, c);
    auto& slot = counts[px.packed()];
    ++slot.first;
    slot.second = px;
  };
  for (int c = 0; c < d.width; ++c) {
    visit(0, c);
    if (d.height > 1) visit(d.height - 1, c);
  }
  for (int r = 1; r + 1 < d.height; ++r) {
    visit(r, 0);
    if (d.width > 1) visit(r, d.width - 1);
  }
  if (counts.empty()) return image.at(0, 0);
  // std::map iterates by packed value, so ties resolve to the smallest.
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second.first > best->second.first) best = it;
  }
  return best->second.second;
}

std::vector<DecodedObject> decode_objects(const Image& image) {
  const ImageDims d = image.dims();
  const Rgb bg = background_of(image);
  std::vector<char> seen(d.pixel_count(), 0);
  std::vector<DecodedObject> out;
  auto idx = [&](int r, int c) { return static_cast<std::size_t>(r) * d.width + c; };

  for (int r = 0; r < d.height; ++r) {
    for (int c = 0; c < d.width; ++c) {
      if (seen[idx(r, c)]) continue;
      const Rgb px = image.at(r, c);
      seen[idx(r, c)] = 1;
      if (px == bg) continue;
      auto color = color_of(px);

      int min_r = r, max_r = r, min_c = c, max_c = c;
      std::size_t count = 0;
      std::queue<std::pair<int, int>> frontier;
      frontier.emplace(r, c);
      while (!frontier.empty()) {
        auto [cr, cc] = frontier.front();
        frontier.pop();
        ++count;
        min_r = std::min(min_r, cr);
        max_r = std::max(max_r, cr);
        min_c = std::min(min_c, cc);
        max_c = std::max(max_c, cc);
        constexpr int kDr[] = {-1, 1, 0, 0};
        constexpr int kDc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int nr = cr + kDr[k];
          const int nc = cc + kDc[k];
          if (nr < 0 || nc < 0 || nr >= d.height || nc >= d.width) continue;
          if (seen[idx(nr, nc)] || !(image.at(nr, nc) == px)) continue;
          seen[idx(nr, nc)] = 1;
          frontier.emplace(nr, nc);
        }
      }
      if (!color || !is_object_color(*color)) continue;

      const int w = max_c - min_c + 1;
      const int h = max_r - min_r + 1;
      Shape shape = Shape::kCircle;
      if (count == static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
        shape = Shape::kSquare;
      } else if (image.at(min_r, min_c) == px && !(image.at(min_r, max_c) == px)) {
        shape = Shape::kTriangle;
      }
      out.push_back({shape, *color,
                     BBox{double(min_c), double(min_r), double(max_c + 1), double(max_r + 1)}});
    }
  }
  return out;
}

std::vector<std::pair<Color, Shape>> parse_mentions(std::string_view sentence) {
  const auto words = canonical_words(sentence);
  std::vector<std::pair<Color, Shape>> mentions;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    auto color = parse_color(words[i]);
    auto shape = parse_shape(words[i + 1]);
    if (color && shape) mentions.emplace_back(*color, *shape);
  }
  return mentions;
}

std::vector<backends::RawBox> PerfectDetector::detect(const Image& image) const {
  std::vector<backends::RawBox> boxes;
  for (const auto& o : decode_objects(image)) {
    boxes.push_back({o.region.x1, o.region.y1, o.region.x2, o.region.y2, 1.0});
  }
  return boxes;
}

backends::Grounding PerfectGrounder::ground(const Image& image, const std::string& text) const {
  const auto mentions = parse_mentions(text);
  if (!mentions.empty()) {
    for (const auto& o : decode_objects(image)) {
      if (o.color == mentions.front().first && o.shape == mentions.front().second) {
        return {{o.region.x1, o.region.y1, o.region.x2, o.region.y2, std::nullopt}, 1.0};
      }
    }
  }
  throw Error(ErrorCode::kBackendRejected, fmt::format("no region matches '{}'", text));
}

std::string RuleExtractor::extract(const std::string& prompt) const {
  // The hypothesis sits on the last "Input: " line.
  const auto marker = prompt.rfind("Input: ");
  if (marker == std::string::npos) return "[]";
  const auto eol = prompt.find('\n', marker);
  const std::string hypothesis =
      prompt.substr(marker + 7, eol == std::string::npos ? std::string::npos : eol - marker - 7);

  std::vector<ExtractionPair> pairs;
  std::string_view rest = hypothesis;
  while (!rest.empty()) {
    const auto sep = rest.find(" and ");
    const auto words = text::split_words(rest.substr(0, sep));
    for (std::size_t i = 0; i + 1 < words.size(); ++i) {
      if (parse_color(text::to_lower(words[i])) && parse_shape(text::to_lower(words[i + 1]))) {
        std::vector<std::string> tail(words.begin() + static_cast<long>(i) + 2, words.end());
        pairs.push_back({words[i] + " " + words[i + 1], text::join(tail, " ")});
        break;
      }
    }
    rest = sep == std::string_view::npos ? std::string_view{} : rest.substr(sep + 5);
  }
  return render_extraction(pairs);
}

Image FillInpainter::inpaint(const Image& image, const Mask& mask) const {
  if (mask.dims() != image.dims()) {
    throw Error(ErrorCode::kDimensionMismatch, "mask and image sizes differ");
  }
  const Rgb bg = background_of(image, &mask);
  Image out = image;
  for (int r = 0; r < image.dims().height; ++r) {
    for (int c = 0; c < image.dims().width; ++c) {
      if (mask.white(r, c)) out.set(r, c, bg);
    }
  }
  return out;
}

backends::Prediction ReferenceVe::predict(const Image& image, const std::string& hypothesis) const {
  const auto objects = decode_objects(image);
  for (const auto& [color, shape] : parse_mentions(hypothesis)) {
    const bool found = std::any_of(objects.begin(), objects.end(), [&](const DecodedObject& o) {
      return o.color == color && o.shape == shape;
    });
    if (!found) return {Label::kContradiction, std::nullopt};
  }
  return {Label::kEntailment, std::nullopt};
}

RandomFlipVe::RandomFlipVe(std::uint64_t seed, double p) : seed_(seed), p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kConfig, "flip probability outside [0, 1]");
}

bool RandomFlipVe::flips(const Image& image, const std::string& hypothesis) const {
  const std::string key = sha256_hex(encode_png(image)) + "\n" + hypothesis;
  return keyed_unit(seed_, key) < p_;
}

backends::Prediction RandomFlipVe::predict(const Image& image, const std::string& hypothesis) const {
  backends::Prediction p = reference_.predict(image, hypothesis);
  if (flips(image, hypothesis)) {
    p.label = p.label == Label::kEntailment ? Label::kContradiction : Label::kEntailment;
  }
  return p;
}

backends::ServiceRegistry standard_registry() {
  using backends::ModelSet;
  using backends::Service;
  backends::ServiceRegistry registry;
  registry.add("synthetic", [](const auto&) {
    ModelSet m;
    m.extract = std::make_shared<RuleExtractor>();
    m.detect = std::make_shared<PerfectDetector>();
    m.ground = std::make_shared<PerfectGrounder>();
    m.inpaint = std::make_shared<FillInpainter>();
    m.synonym = std::make_shared<backends::LexiconSynonymizer>(
        backends::LexiconSynonymizer::builtin());
    m.predict = std::make_shared<ReferenceVe>();
    m.metadata = "synthetic/1 perfect backends, reference VE";
    return std::make_shared<const Service>(std::move(m));
  });
  registry.add("identity-synonym", [](const auto&) {
    ModelSet m;
    m.synonym = std::make_shared<backends::IdentitySynonymizer>();
    m.metadata = "identity synonymizer";
    return std::make_shared<const Service>(std::move(m));
  });
  registry.add("always-entailment", [](const auto&) {
    ModelSet m;
    m.predict = std::make_shared<AlwaysEntailmentVe>();
    m.metadata = "always-entailment VE";
    return std::make_shared<const Service>(std::move(m));
  });
  registry.add("random-flip", [](const backends::ServiceRegistry::Params& params) {
    std::uint64_t seed = 0;
    double p = 0.25;
    try {
      if (auto it = params.find("seed"); it != params.end()) seed = std::stoull(it->second);
      if (auto it = params.find("p"); it != params.end()) p = std::stod(it->second);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "random-flip needs numeric seed and p");
    }
    ModelSet m;
    m.predict = std::make_shared<RandomFlipVe>(seed, p);
    m.metadata = fmt::format("random-flip VE seed={} p={}", seed, p);
    return std::make_shared<const Service>(std::move(m));
  });
  return registry;
}

json to_json(const Scene& scene) {
  json objects = json::array();
  for (const auto& o : scene.objects) {
    objects.push_back({{"shape", to_string(o.shape)},
                       {"color", to_string(o.color)},
                       {"region", {{"x1", o.region.x1}, {"y1", o.region.y1},
                                   {"x2", o.region.x2}, {"y2", o.region.y2}}}});
  }
  return {{"dims", {{"width", scene.dims.width}, {"height", scene.dims.height}}},
          {"background", to_string(scene.background)},
          {"seed", scene.seed},
          {"objects", objects}};
}

Scene scene_from_json(const json& j) {
  try {
    Scene s;
    s.dims = {j.at("dims").at("width").get<int>(), j.at("dims").at("height").get<int>()};
    auto bg = parse_color(j.at("background").get<std::string>());
    if (!bg) throw Error(ErrorCode::kConfig, "unknown background color");
    s.background = *bg;
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& o : j.at("objects")) {
      auto shape = parse_shape(o.at("shape").get<std::string>());
      auto color = parse_color(o.at("color").get<std::string>());
      if (!shape || !color) throw Error(ErrorCode::kConfig, "unknown shape or color");
      const auto& r = o.at("region");
      s.objects.push_back({*shape, *color,
                           {r.at("x1").get<double>(), r.at("y1").get<double>(),
                            r.at("x2").get<double>(), r.at("y2").get<double>()}});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, fmt::format("bad scene JSON: {}", e.what()));
  }
}

Corpus build_corpus(const CorpusOptions& options) {
  Rng master(options.seed);
  Corpus corpus;
  for (int i = 0; i < options.scenes; ++i) {
    const std::uint64_t seed = master.next();
    const int n = master.between(options.min_objects, options.max_objects);
    const int k = master.between(1, std::min(options.max_mentioned, n));
    Scene scene = gen_scene(seed, n, options.dims);
    corpus.samples.push_back(make_sample(scene, k, fmt::format("scene-{:04d}", i)));
    corpus.scenes.push_back(std::move(scene));
  }
  return corpus;
}

Corpus write_corpus(const std::filesystem::path& dir, const CorpusOptions& options) {
  Corpus corpus = build_corpus(options);
  std::string manifest;
  json scenes = json::array();
  for (std::size_t i = 0; i < corpus.scenes.size(); ++i) {
    const Sample& s = corpus.samples[i];
    const std::string image = fmt::format("images/{}.png", s.id);
    write_png(dir / image, render(corpus.scenes[i]));
    manifest += json{{"id", s.id}, {"image", image}, {"hypothesis", s.hypothesis},
                     {"label", to_string(s.label)}}
                    .dump();
    manifest += '\n';
    json entry = to_json(corpus.scenes[i]);
    entry["id"] = s.id;
    entry["mentioned"] = s.mentioned;
    scenes.push_back(std::move(entry));
  }
  write_atomic(dir / "dataset.jsonl", manifest);
  write_atomic(dir / "scenes.json", scenes.dump(2) + "\n");
  return corpus;
}

}  // namespace vemorph::synthetic
