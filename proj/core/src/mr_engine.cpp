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

#include "vemorph/mr_engine.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "vemorph/error.hpp"
#include "vemorph/io.hpp"
#include "vemorph/text.hpp"

namespace vemorph {

using nlohmann::json;

std::string_view to_string(MrKind mr) noexcept {
  switch (mr) {
    case MrKind::kMr1: return "MR1";
    case MrKind::kMr2: return "MR2";
    case MrKind::kMr3: return "MR3";
  }
  return "MR1";
}

std::optional<MrKind> parse_mr(std::string_view s) noexcept {
  for (MrKind mr : kAllMrs) {
    if (to_string(mr) == s) return mr;
  }
  return std::nullopt;
}

Label oracle_for(MrKind mr) noexcept {
  return mr == MrKind::kMr2 ? Label::kContradiction : Label::kEntailment;
}

std::vector<BBox> feasibility_set(const AlignmentResult& alignment, MrKind mr,
                                  std::size_t target, IouThreshold t) {
  const bool linked_target = mr != MrKind::kMr3;
  const BBox region =
      linked_target ? alignment.linked.at(target).region : alignment.unlinked.at(target);

  std::vector<bool> own(alignment.detected.size(), false);
  bool exact = false;
  for (std::size_t i = 0; i < alignment.detected.size(); ++i) {
    if (alignment.detected[i] == region) own[i] = exact = true;
  }
  if (!exact && !alignment.detected.empty()) {
    std::size_t best = 0;
    double best_iou = -1.0;
    for (std::size_t i = 0; i < alignment.detected.size(); ++i) {
      const double v = iou(region, alignment.detected[i]);
      if (v > best_iou) {
        best_iou = v;
        best = i;
      }
    }
    if (best_iou > t.value()) own[best] = true;
  }

  std::vector<BBox> compared;
  for (std::size_t i = 0; i < alignment.detected.size(); ++i) {
    if (!own[i]) compared.push_back(alignment.detected[i]);
  }
  for (std::size_t i = 0; i < alignment.linked.size(); ++i) {
    if (linked_target && i == target) continue;
    const BBox& b = alignment.linked[i].region;
    if (std::find(compared.begin(), compared.end(), b) == compared.end()) compared.push_back(b);
  }
  return compared;
}

std::vector<Instantiation> applicable_instantiations(const SourceSample& sample,
                                                     const AlignmentResult& alignment,
                                                     IouThreshold t) {
  std::vector<Instantiation> out;
  if (sample.label != Label::kEntailment) return out;

  for (std::size_t i = 0; i < alignment.linked.size(); ++i) {
    auto compared = feasibility_set(alignment, MrKind::kMr1, i, t);
    const BBox& region = alignment.linked[i].region;
    if (!erasure_feasible(region, compared, t)) continue;
    if (sample.units.size() >= 2) out.push_back({MrKind::kMr1, i, region, compared});
    out.push_back({MrKind::kMr2, i, region, std::move(compared)});
  }
  for (std::size_t i = 0; i < alignment.unlinked.size(); ++i) {
    auto compared = feasibility_set(alignment, MrKind::kMr3, i, t);
    const BBox& region = alignment.unlinked[i];
    if (!erasure_feasible(region, compared, t)) continue;
    out.push_back({MrKind::kMr3, i, region, std::move(compared)});
  }
  return out;
}

Image erase_object(const Image& image, const BBox& region,
                   const backends::BackendClient& inpainter) {
  const Mask mask = render_mask(image.dims(), region);
  if (mask.white_count() == 0) {
    throw Error(ErrorCode::kDegenerateBox, "region covers no pixel center");
  }
  Image out = inpainter.call_inpaint(image, mask);
  if (out.dims() != image.dims()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("inpainter returned {}x{} for a {}x{} image", out.dims().width,
                            out.dims().height, image.dims().width, image.dims().height));
  }
  return out;
}

SynonymOutcome synonym_transform(std::string_view input,
                                 const backends::BackendClient* synonymizer) {
  SynonymOutcome identity{std::string(input), {}, std::nullopt};
  if (!synonymizer) return identity;

  backends::SynonymResult result;
  try {
    result = synonymizer->call_synonym(std::string(input));
  } catch (const Error& e) {
    identity.warning = fmt::format("synonym_{}", e.reason());
    return identity;
  }

  // Replaying the reported substitutions must reproduce the returned text, so
  // untouched words are guaranteed to survive.
  std::string replay(input);
  std::size_t cursor = 0;
  for (const auto& sub : result.substitutions) {
    auto pos = text::find_word(replay, sub.from, cursor);
    if (!pos) {
      identity.warning = "synonym_unverifiable";
      return identity;
    }
    replay.replace(*pos, sub.from.size(), sub.to);
    cursor = *pos + sub.to.size();
  }
  if (replay != result.text) {
    identity.warning = "synonym_unverifiable";
    return identity;
  }
  return {std::move(result.text), std::move(result.substitutions), std::nullopt};
}

std::string make_test_id(std::string_view source_id, MrKind mr, const BBox& region) {
  const std::string key = fmt::format("{}|{}|{:.6f},{:.6f},{:.6f},{:.6f}", source_id,
                                      to_string(mr), region.x1, region.y1, region.x2, region.y2);
  return sha256_hex(key).substr(0, 16);
}

namespace {

GeneratedTest base_test(const SourceSample& sample, const Instantiation& inst) {
  GeneratedTest t;
  t.test_id = make_test_id(sample.id, inst.mr, inst.region);
  t.source_id = sample.id;
  t.mr = inst.mr;
  t.premise = fmt::format("images/{}.png", t.test_id);
  t.hypothesis = sample.hypothesis;
  t.source_hypothesis = sample.hypothesis;
  t.oracle = oracle_for(inst.mr);
  t.provenance.erased_region = inst.region;
  t.provenance.compared = inst.compared;
  return t;
}

void expect(const Instantiation& inst, MrKind mr) {
  if (inst.mr != mr) {
    throw std::logic_error(fmt::format("{} instantiation passed to {}", to_string(inst.mr),
                                       to_string(mr)));
  }
}

}  // namespace

EmittedTest apply_mr1(const SourceSample& sample, const AlignmentResult& alignment,
                      const Instantiation& inst, const backends::BackendClient& inpainter,
                      const backends::BackendClient* synonymizer) {
  expect(inst, MrKind::kMr1);
  const LinkedPair& target = alignment.linked.at(inst.target);
  const std::string reduced = reassemble_after_erase(sample.hypothesis, sample.units, target.unit);
  SynonymOutcome syn = synonym_transform(reduced, synonymizer);

  EmittedTest out;
  out.test = base_test(sample, inst);
  out.test.hypothesis = std::move(syn.text);
  out.test.provenance.erased_unit = target.unit;
  out.test.provenance.substitutions = std::move(syn.substitutions);
  if (syn.warning) out.warnings.push_back(*syn.warning);
  out.premise_image = erase_object(sample.image, inst.region, inpainter);
  return out;
}

EmittedTest apply_mr2(const SourceSample& sample, const AlignmentResult&,
                      const Instantiation& inst, const backends::BackendClient& inpainter) {
  expect(inst, MrKind::kMr2);
  EmittedTest out;
  out.test = base_test(sample, inst);
  out.premise_image = erase_object(sample.image, inst.region, inpainter);
  return out;
}

EmittedTest apply_mr3(const SourceSample& sample, const AlignmentResult&,
                      const Instantiation& inst, const backends::BackendClient& inpainter) {
  expect(inst, MrKind::kMr3);
  EmittedTest out;
  out.test = base_test(sample, inst);
  out.premise_image = erase_object(sample.image, inst.region, inpainter);
  return out;
}

EmittedTest apply(const SourceSample& sample, const AlignmentResult& alignment,
                  const Instantiation& inst, const backends::BackendClient& inpainter,
                  const backends::BackendClient* synonymizer) {
  switch (inst.mr) {
    case MrKind::kMr1: return apply_mr1(sample, alignment, inst, inpainter, synonymizer);
    case MrKind::kMr2: return apply_mr2(sample, alignment, inst, inpainter);
    case MrKind::kMr3: return apply_mr3(sample, alignment, inst, inpainter);
  }
  throw std::logic_error("unhandled MR");
}

json to_json(const GeneratedTest& t) {
  json subs = json::array();
  for (const auto& s : t.provenance.substitutions) subs.push_back({{"from", s.from}, {"to", s.to}});
  json compared = json::array();
  for (const auto& b : t.provenance.compared) compared.push_back(to_json(b));
  json provenance = {{"erased_region", to_json(t.provenance.erased_region)},
                     {"erased_unit", t.provenance.erased_unit ? to_json(*t.provenance.erased_unit)
                                                              : json(nullptr)},
                     {"substitutions", subs},
                     {"compared", compared}};
  return {{"test_id", t.test_id},
          {"source_id", t.source_id},
          {"mr", to_string(t.mr)},
          {"premise", t.premise},
          {"hypothesis", t.hypothesis},
          {"source_hypothesis", t.source_hypothesis},
          {"oracle", to_string(t.oracle)},
          {"provenance", provenance}};
}

GeneratedTest generated_test_from_json(const json& j) {
  GeneratedTest t;
  try {
    t.test_id = j.at("test_id").get<std::string>();
    t.source_id = j.at("source_id").get<std::string>();
    auto mr = parse_mr(j.at("mr").get<std::string>());
    auto oracle = parse_label(j.at("oracle").get<std::string>());
    if (!mr || !oracle) throw Error(ErrorCode::kValidation, "unknown MR or oracle label");
    t.mr = *mr;
    t.oracle = *oracle;
    t.premise = j.at("premise").get<std::string>();
    t.hypothesis = j.at("hypothesis").get<std::string>();
    t.source_hypothesis = j.at("source_hypothesis").get<std::string>();
    const json& p = j.at("provenance");
    t.provenance.erased_region = bbox_from_json(p.at("erased_region"));
    if (!p.at("erased_unit").is_null()) t.provenance.erased_unit = unit_from_json(p.at("erased_unit"));
    for (const auto& s : p.at("substitutions")) {
      t.provenance.substitutions.push_back(
          {s.at("from").get<std::string>(), s.at("to").get<std::string>()});
    }
    for (const auto& b : p.at("compared")) t.provenance.compared.push_back(bbox_from_json(b));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, fmt::format("bad test record: {}", e.what()));
  }
  if (t.oracle != oracle_for(t.mr)) {
    throw Error(ErrorCode::kValidation, fmt::format("{}: oracle does not match MR", t.test_id));
  }
  if ((t.mr == MrKind::kMr1) != t.provenance.erased_unit.has_value()) {
    throw Error(ErrorCode::kValidation,
                fmt::format("{}: erased unit must be present exactly for MR1", t.test_id));
  }
  if (t.mr != MrKind::kMr1 && t.hypothesis != t.source_hypothesis) {
    throw Error(ErrorCode::kValidation,
                fmt::format("{}: {} must keep the source hypothesis", t.test_id, to_string(t.mr)));
  }
  return t;
}

}  // namespace vemorph
