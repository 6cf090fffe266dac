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

#include "vemorph/harness.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "vemorph/alignment.hpp"
#include "vemorph/error.hpp"
#include "vemorph/image.hpp"
#include "vemorph/io.hpp"
#include "vemorph/parallel.hpp"
#include "vemorph/resources.hpp"
#include "vemorph/synthetic.hpp"
#include "vemorph/text.hpp"

namespace vemorph {

using nlohmann::json;
using backends::BackendClient;
using backends::BackendEndpoint;
using backends::Role;

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

bool image_signature_ok(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint8_t head[8] = {};
  in.read(reinterpret_cast<char*>(head), sizeof head);
  return looks_like_image(std::span<const std::uint8_t>(head, static_cast<std::size_t>(in.gcount())));
}

void write_if_changed(const fs::path& path, std::string_view text) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec) && fs::file_size(path, ec) == text.size()) {
    try {
      if (read_text(path) == text) return;
    } catch (const Error&) {
    }
  }
  write_atomic(path, text);
}

void write_if_changed(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::error_code ec;
  if (fs::is_regular_file(path, ec) && fs::file_size(path, ec) == bytes.size()) {
    try {
      auto old = read_bytes(path);
      if (std::equal(old.begin(), old.end(), bytes.begin(), bytes.end())) return;
    } catch (const Error&) {
    }
  }
  write_atomic(path, bytes);
}

json read_json_file(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kValidation, fmt::format("{}: {}", path.string(), e.what()));
  }
}

template <typename Fn>
auto read_jsonl(const fs::path& path, Fn&& fn) {
  const std::string text = read_text(path);
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kValidation,
                  fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
}

std::string prefixed(std::string_view prefix, std::string_view reason) {
  return fmt::format("{}.{}", prefix, reason);
}

void merge(Counts& into, const Counts& from) {
  for (const auto& [k, v] : from) into[k] += v;
}

json counts_json(const Counts& c) {
  json j = json::object();
  for (const auto& [k, v] : c) j[k] = v;
  return j;
}

Counts counts_from_json(const json& j) {
  Counts c;
  for (auto it = j.begin(); it != j.end(); ++it) c[it.key()] = it.value().get<std::size_t>();
  return c;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

json optional_json(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

MrKind mr_from_json(const json& j) {
  auto mr = parse_mr(j.get<std::string>());
  if (!mr) throw Error(ErrorCode::kValidation, fmt::format("unknown MR '{}'", j.get<std::string>()));
  return *mr;
}

}  // namespace

// ---- dataset ---------------------------------------------------------------

Dataset load_dataset(const fs::path& manifest, const fs::path& image_dir, double max_bad_ratio) {
  std::string text;
  try {
    text = read_text(manifest);
  } catch (const Error& e) {
    throw Error(ErrorCode::kManifestUnreadable, e.what());
  }

  Dataset ds;
  ds.image_dir = image_dir;
  std::map<std::string, std::size_t> first_line;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    ++ds.lines;
    auto reject = [&](std::string message) { ds.rejected.push_back({line_no, std::move(message)}); };

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      reject("not valid JSON");
      continue;
    }
    if (!j.is_object()) {
      reject("record is not a JSON object");
      continue;
    }
    std::string missing;
    for (const char* key : {"id", "image", "hypothesis", "label"}) {
      if (!j.contains(key) || !j[key].is_string()) {
        missing = key;
        break;
      }
    }
    if (!missing.empty()) {
      reject(fmt::format("field '{}' missing or not a string", missing));
      continue;
    }

    DatasetRecord r;
    r.id = j["id"].get<std::string>();
    r.image = j["image"].get<std::string>();
    r.hypothesis = std::string(text::trim(j["hypothesis"].get<std::string>()));
    auto label = parse_label(j["label"].get<std::string>());
    if (r.id.empty()) {
      reject("empty id");
      continue;
    }
    if (r.hypothesis.empty()) {
      reject("empty hypothesis");
      continue;
    }
    if (!label) {
      reject(fmt::format("unknown label '{}'", j["label"].get<std::string>()));
      continue;
    }
    r.label = *label;
    if (auto [it, fresh] = first_line.emplace(r.id, line_no); !fresh) {
      reject(fmt::format("duplicate id '{}' (first seen on line {})", r.id, it->second));
      continue;
    }
    if (!image_signature_ok(image_dir / r.image)) {
      first_line.erase(r.id);
      reject(fmt::format("image '{}' is missing or not a PNG/JPEG file", r.image));
      continue;
    }
    ds.records.push_back(std::move(r));
  }

  if (ds.lines > 0 &&
      static_cast<double>(ds.rejected.size()) > max_bad_ratio * static_cast<double>(ds.lines)) {
    std::string detail;
    for (std::size_t i = 0; i < std::min<std::size_t>(ds.rejected.size(), 5); ++i) {
      detail += fmt::format("\n  line {}: {}", ds.rejected[i].line, ds.rejected[i].message);
    }
    throw Error(ErrorCode::kValidation,
                fmt::format("{}: {} of {} lines rejected (limit {:.0f}%){}", manifest.string(),
                            ds.rejected.size(), ds.lines, max_bad_ratio * 100.0, detail));
  }
  return ds;
}

// ---- configuration ---------------------------------------------------------

std::vector<MrKind> parse_mr_list(std::string_view list) {
  std::set<MrKind> picked;
  std::string_view rest = list;
  while (true) {
    auto comma = rest.find(',');
    auto item = text::trim(rest.substr(0, comma));
    auto mr = parse_mr(item);
    if (!mr) throw Error(ErrorCode::kConfig, fmt::format("unknown MR '{}'", item));
    picked.insert(*mr);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return {picked.begin(), picked.end()};
}

RunConfig RunConfig::with_backend(const std::string& url) {
  RunConfig c;
  for (Role role : backends::kAllRoles) {
    BackendEndpoint ep;
    ep.role = role;
    ep.base_url = url;
    c.backends[role] = ep;
  }
  return c;
}

namespace {

void apply_endpoint_fields(BackendEndpoint& ep, const json& j, const fs::path& base_dir) {
  if (j.is_string()) {
    ep.base_url = j.get<std::string>();
    return;
  }
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "backend entry must be a URL or an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "url") {
      ep.base_url = v.get<std::string>();
    } else if (key == "timeout_ms") {
      ep.timeout_ms = v.get<int>();
    } else if (key == "retries") {
      ep.retries = v.get<int>();
    } else if (key == "max_concurrency") {
      ep.max_concurrency = v.get<int>();
    } else if (key == "cache_groundings") {
      ep.cache_groundings = v.get<bool>();
    } else if (key == "payload_encoding") {
      ep.payload_encoding = v.get<std::string>();
    } else if (key == "scratch_dir") {
      ep.scratch_dir = base_dir / v.get<std::string>();
    } else {
      throw Error(ErrorCode::kConfig, fmt::format("unknown backend option '{}'", key));
    }
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "config must be a JSON object");
  RunConfig c;
  auto path_of = [&](const json& v) { return base_dir / v.get<std::string>(); };
  json backends_json = json::object();
  bool has_backends = false;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const json& v = it.value();
      if (key == "dataset") {
        c.dataset = path_of(v);
      } else if (key == "image_dir") {
        c.image_dir = path_of(v);
      } else if (key == "output_dir") {
        c.output_dir = path_of(v);
      } else if (key == "backends") {
        backends_json = v;
        has_backends = true;
      } else if (key == "iou_threshold") {
        c.iou_threshold = IouThreshold(v.get<double>());
      } else if (key == "mrs") {
        std::vector<std::string> names = v.get<std::vector<std::string>>();
        c.mrs = parse_mr_list(text::join(names, ","));
      } else if (key == "workers") {
        c.workers = v.get<int>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "max_bad_line_ratio") {
        c.max_bad_line_ratio = v.get<double>();
      } else if (key == "prompt_template") {
        c.prompt_template = path_of(v);
      } else if (key == "icl_pool") {
        c.icl_pool = path_of(v);
      } else if (key == "icl_examples") {
        c.icl_examples = v.get<std::size_t>();
      } else {
        throw Error(ErrorCode::kConfig, fmt::format("unknown config key '{}'", key));
      }
    }

    if (!has_backends) {
      c.backends = with_backend("inprocess:synthetic").backends;
    } else {
      if (!backends_json.is_object()) throw Error(ErrorCode::kConfig, "'backends' must be an object");
      std::optional<BackendEndpoint> fallback;
      if (backends_json.contains("default")) {
        fallback.emplace();
        apply_endpoint_fields(*fallback, backends_json["default"], base_dir);
      }
      for (auto it = backends_json.begin(); it != backends_json.end(); ++it) {
        if (it.key() != "default" && !backends::parse_role(it.key())) {
          throw Error(ErrorCode::kConfig, fmt::format("unknown backend role '{}'", it.key()));
        }
      }
      for (Role role : backends::kAllRoles) {
        const std::string name(backends::to_string(role));
        std::optional<BackendEndpoint> ep = fallback;
        if (backends_json.contains(name)) {
          const json& v = backends_json[name];
          if (v.is_null()) {
            ep.reset();
          } else {
            if (!ep) ep.emplace();
            apply_endpoint_fields(*ep, v, base_dir);
          }
        }
        if (!ep) continue;
        if (ep->base_url.empty()) {
          throw Error(ErrorCode::kConfig, fmt::format("backend '{}' has no url", name));
        }
        ep->role = role;
        c.backends[role] = *ep;
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, fmt::format("bad config value: {}", e.what()));
  }

  if (c.dataset.empty()) throw Error(ErrorCode::kConfig, "config needs 'dataset'");
  if (c.image_dir.empty()) c.image_dir = c.dataset.parent_path();
  if (c.workers < 1) throw Error(ErrorCode::kConfig, "'workers' must be at least 1");
  if (!(c.max_bad_line_ratio >= 0.0 && c.max_bad_line_ratio <= 1.0)) {
    throw Error(ErrorCode::kConfig, "'max_bad_line_ratio' must lie in [0, 1]");
  }
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, fmt::format("{}: {}", path.string(), e.what()));
  }
  return from_json(j, path.parent_path());
}

PromptSpec RunConfig::prompt_spec() const {
  PromptSpec spec;
  spec.layout = prompt_template ? PromptTemplate::parse(read_text(*prompt_template))
                                : PromptTemplate::builtin();
  const std::vector<IclExample> pool =
      icl_pool ? parse_candidate_pool(read_text(*icl_pool)) : builtin_candidate_pool();
  if (icl_examples > 0) spec.examples = select_icl_examples(pool, icl_examples);
  return spec;
}

// ---- backends --------------------------------------------------------------

Backends::Backends(const RunConfig& config, const backends::ServiceRegistry& registry) {
  for (const auto& [role, endpoint] : config.backends) {
    BackendEndpoint ep = endpoint;
    ep.role = role;
    clients_.emplace(role, BackendClient::connect(ep, registry));
  }
}

const BackendClient& Backends::at(Role role) const {
  auto it = clients_.find(role);
  if (it == clients_.end()) {
    throw Error(ErrorCode::kConfig,
                fmt::format("no backend configured for role '{}'", backends::to_string(role)));
  }
  return it->second;
}

const BackendClient* Backends::find(Role role) const {
  auto it = clients_.find(role);
  return it == clients_.end() ? nullptr : &it->second;
}

std::map<std::string, std::string> Backends::probe() const {
  std::map<std::string, std::string> out;
  std::size_t reachable = 0;
  for (const auto& [role, client] : clients_) {
    const std::string name(backends::to_string(role));
    try {
      backends::Health h = client.health();
      if (std::find(h.roles.begin(), h.roles.end(), role) == h.roles.end()) {
        out[name] = "role not served";
        continue;
      }
      out[name] = h.metadata;
      ++reachable;
    } catch (const Error&) {
      out[name] = "unreachable";
    }
  }
  if (!clients_.empty() && reachable == 0) {
    throw Error(ErrorCode::kBackendUnavailable, "no configured backend is reachable");
  }
  return out;
}

// ---- suite files -----------------------------------------------------------

std::vector<GeneratedTest> read_manifest(const fs::path& path) {
  std::vector<GeneratedTest> tests;
  read_jsonl(path, [&](const json& j) { tests.push_back(generated_test_from_json(j)); });
  return tests;
}

void write_manifest(const fs::path& path, std::vector<GeneratedTest> tests) {
  std::sort(tests.begin(), tests.end(),
            [](const auto& a, const auto& b) { return a.test_id < b.test_id; });
  std::string out;
  for (const auto& t : tests) {
    out += to_json(t).dump();
    out += '\n';
  }
  write_if_changed(path, out);
}

// ---- generate --------------------------------------------------------------

std::size_t GenerationSummary::total_generated() const {
  std::size_t n = 0;
  for (const auto& [mr, count] : generated) n += count;
  return n;
}

json to_json(const GenerationSummary& s) {
  json generated = json::object();
  for (const auto& [mr, n] : s.generated) generated[std::string(to_string(mr))] = n;
  json metadata = json::object();
  for (const auto& [role, m] : s.backend_metadata) metadata[role] = m;
  return {{"records", s.records},
          {"processed", s.processed},
          {"skipped", counts_json(s.skipped)},
          {"unit_skips", counts_json(s.unit_skips)},
          {"instantiation_skips", counts_json(s.instantiation_skips)},
          {"warnings", counts_json(s.warnings)},
          {"generated", generated},
          {"prompt_template", {{"version", s.prompt_version}, {"sha256", s.prompt_sha256}}},
          {"backends", metadata}};
}

GenerationSummary generation_summary_from_json(const json& j) {
  GenerationSummary s;
  try {
    s.records = j.at("records").get<std::size_t>();
    s.processed = j.at("processed").get<std::size_t>();
    s.skipped = counts_from_json(j.at("skipped"));
    s.unit_skips = counts_from_json(j.at("unit_skips"));
    s.instantiation_skips = counts_from_json(j.at("instantiation_skips"));
    s.warnings = counts_from_json(j.at("warnings"));
    const json& g = j.at("generated");
    for (auto it = g.begin(); it != g.end(); ++it) {
      s.generated[mr_from_json(it.key())] = it.value().get<std::size_t>();
    }
    s.prompt_version = j.at("prompt_template").at("version").get<std::string>();
    s.prompt_sha256 = j.at("prompt_template").at("sha256").get<std::string>();
    const json& b = j.at("backends");
    for (auto it = b.begin(); it != b.end(); ++it) {
      s.backend_metadata[it.key()] = it.value().get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, fmt::format("bad generation record: {}", e.what()));
  }
  return s;
}

namespace {

struct GenerateContext {
  const RunConfig& config;
  const Backends& backends;
  PromptSpec prompt;
  fs::path image_dir;
  fs::path out_images;
};

struct SampleOutcome {
  // Empty when the sample was processed.
  std::string skip;
  Counts unit_skips;
  Counts instantiation_skips;
  Counts warnings;
  std::vector<GeneratedTest> tests;
  std::optional<json> alignment;
};

SampleOutcome process_sample(const DatasetRecord& record, const GenerateContext& ctx) {
  SampleOutcome out;
  if (record.label != Label::kEntailment) {
    out.skip = "sample.not_entailment";
    return out;
  }

  SourceSample source{record.id, record.hypothesis, record.label, {}, {}};
  try {
    source.image = read_image(ctx.image_dir / record.image);
  } catch (const Error& e) {
    out.skip = prefixed("sample.image", e.reason());
    return out;
  }

  CombineResult combined;
  try {
    const std::string response =
        ctx.backends.at(Role::kExtract).call_extract(build_prompt(record.hypothesis, ctx.prompt));
    combined = combine_units(record.hypothesis, parse_extraction(response));
  } catch (const Error& e) {
    out.skip = prefixed("sample.extract", e.reason());
    return out;
  }
  if (!combined.dropped.empty()) out.unit_skips["unit.not_in_hypothesis"] += combined.dropped.size();
  if (combined.units.empty()) {
    out.skip = "sample.no_units";
    return out;
  }
  source.units = combined.units;

  AlignmentResult alignment;
  try {
    alignment = align(source.image, source.units, ctx.backends.at(Role::kDetect),
                      ctx.backends.at(Role::kGround), ctx.config.iou_threshold);
  } catch (const Error& e) {
    out.skip = prefixed("sample.align", e.reason());
    return out;
  }
  for (const auto& s : alignment.skipped_units) ++out.unit_skips[prefixed("unit", s.reason)];
  if (alignment.dropped_detections > 0) {
    out.unit_skips["detection.degenerate_box"] += alignment.dropped_detections;
  }

  json dropped = json::array();
  for (const auto& p : combined.dropped) dropped.push_back({{"object", p.object}, {"property", p.property}});
  json units = json::array();
  for (const auto& u : source.units) units.push_back(to_json(u));
  out.alignment = json{{"id", record.id},
                       {"hypothesis", record.hypothesis},
                       {"units", units},
                       {"dropped_pairs", dropped},
                       {"alignment", to_json(alignment)}};

  const auto& selected = ctx.config.mrs;
  const BackendClient& inpainter = ctx.backends.at(Role::kInpaint);
  const BackendClient* synonymizer = ctx.backends.find(Role::kSynonym);
  std::set<std::string> seen;
  for (const auto& inst : applicable_instantiations(source, alignment, ctx.config.iou_threshold)) {
    if (std::find(selected.begin(), selected.end(), inst.mr) == selected.end()) continue;
    EmittedTest emitted;
    try {
      emitted = apply(source, alignment, inst, inpainter, synonymizer);
    } catch (const Error& e) {
      ++out.instantiation_skips[prefixed("instantiation", e.reason())];
      continue;
    }
    if (!seen.insert(emitted.test.test_id).second) {
      ++out.instantiation_skips["instantiation.duplicate_test_id"];
      continue;
    }
    for (const auto& w : emitted.warnings) ++out.warnings[prefixed("warning", w)];
    write_if_changed(ctx.out_images / (emitted.test.test_id + ".png"),
                     encode_png(emitted.premise_image));
    out.tests.push_back(std::move(emitted.test));
  }
  return out;
}

void remove_orphans(const fs::path& images, const std::set<std::string>& keep) {
  std::error_code ec;
  if (!fs::is_directory(images, ec)) return;
  for (const auto& entry : fs::directory_iterator(images)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
    if (!keep.count(entry.path().stem().string())) fs::remove(entry.path(), ec);
  }
}

}  // namespace

GenerationSummary generate(const RunConfig& config, const Backends& backends) {
  GenerationSummary summary;
  summary.backend_metadata = backends.probe();
  for (Role role : {Role::kExtract, Role::kDetect, Role::kGround, Role::kInpaint}) backends.at(role);

  const Dataset dataset = load_dataset(config.dataset, config.image_dir, config.max_bad_line_ratio);
  GenerateContext ctx{config, backends, config.prompt_spec(), config.image_dir,
                      config.output_dir / "images"};
  summary.prompt_version = ctx.prompt.layout.version;
  summary.prompt_sha256 = ctx.prompt.layout.sha256;

  std::error_code ec;
  fs::create_directories(ctx.out_images, ec);
  if (ec) {
    throw Error(ErrorCode::kIo,
                fmt::format("cannot create {}: {}", ctx.out_images.string(), ec.message()));
  }

  std::vector<SampleOutcome> outcomes(dataset.records.size());
  parallel_for(dataset.records.size(), config.workers,
               [&](std::size_t i) { outcomes[i] = process_sample(dataset.records[i], ctx); });

  summary.records = dataset.lines;
  if (!dataset.rejected.empty()) summary.skipped["sample.invalid_record"] = dataset.rejected.size();
  for (MrKind mr : config.mrs) summary.generated[mr] = 0;

  std::vector<GeneratedTest> tests;
  std::vector<std::pair<std::string, std::string>> alignments;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (o.skip.empty()) {
      ++summary.processed;
    } else {
      ++summary.skipped[o.skip];
    }
    merge(summary.unit_skips, o.unit_skips);
    merge(summary.instantiation_skips, o.instantiation_skips);
    merge(summary.warnings, o.warnings);
    if (o.alignment) alignments.emplace_back(dataset.records[i].id, o.alignment->dump());
    for (auto& t : o.tests) {
      ++summary.generated[t.mr];
      tests.push_back(std::move(t));
    }
  }

  std::set<std::string> ids;
  for (const auto& t : tests) ids.insert(t.test_id);
  if (ids.size() != tests.size()) {
    // Distinct samples sharing an id would overwrite each other's premise.
    throw Error(ErrorCode::kValidation, "test id collision across source samples");
  }

  std::sort(alignments.begin(), alignments.end());
  std::string alignment_text;
  for (const auto& [id, line] : alignments) alignment_text += line + "\n";

  write_manifest(config.output_dir / kManifestFile, std::move(tests));
  write_if_changed(config.output_dir / kAlignmentsFile, alignment_text);
  write_if_changed(config.output_dir / kGenerationFile, to_json(summary).dump(2) + "\n");
  remove_orphans(ctx.out_images, ids);
  return summary;
}

// ---- execute ---------------------------------------------------------------

namespace {

json to_json(const PredictionRecord& p) {
  json j = {{"test_id", p.test_id}};
  if (p.prediction) {
    j["label"] = to_string(p.prediction->label);
    if (p.prediction->confidence) j["confidence"] = *p.prediction->confidence;
  } else {
    j["error"] = p.error;
  }
  return j;
}

PredictionRecord prediction_from_json(const json& j) {
  PredictionRecord p;
  p.test_id = j.at("test_id").get<std::string>();
  if (j.contains("label")) {
    auto label = parse_label(j["label"].get<std::string>());
    if (!label) throw Error(ErrorCode::kValidation, "unknown predicted label");
    backends::Prediction pred{*label, std::nullopt};
    if (j.contains("confidence")) pred.confidence = j["confidence"].get<double>();
    p.prediction = pred;
  } else {
    p.error = j.at("error").get<std::string>();
  }
  return p;
}

void write_predictions(const fs::path& path, std::map<std::string, PredictionRecord> records) {
  std::string out;
  for (const auto& [id, p] : records) out += to_json(p).dump() + "\n";
  write_if_changed(path, out);
}

}  // namespace

std::vector<PredictionRecord> read_predictions(const fs::path& path) {
  std::vector<PredictionRecord> out;
  read_jsonl(path, [&](const json& j) { out.push_back(prediction_from_json(j)); });
  return out;
}

ExecutionSummary execute(const fs::path& suite_dir, const BackendClient& predictor, int workers) {
  const auto tests = read_manifest(suite_dir / kManifestFile);
  const fs::path pred_path = suite_dir / kPredictionsFile;

  std::set<std::string> ids;
  for (const auto& t : tests) ids.insert(t.test_id);

  std::map<std::string, PredictionRecord> done;
  if (fs::exists(pred_path)) {
    for (auto& p : read_predictions(pred_path)) {
      if (p.prediction && ids.count(p.test_id)) done[p.test_id] = std::move(p);
    }
  }

  ExecutionSummary summary;
  summary.tests = tests.size();
  summary.resumed = done.size();

  std::vector<const GeneratedTest*> pending;
  for (const auto& t : tests) {
    if (!done.count(t.test_id)) pending.push_back(&t);
  }

  const std::size_t batch = std::max<std::size_t>(64, pending.size() / 20);
  for (std::size_t start = 0; start < pending.size(); start += batch) {
    const std::size_t n = std::min(batch, pending.size() - start);
    std::vector<PredictionRecord> results(n);
    parallel_for(n, workers, [&](std::size_t i) {
      const GeneratedTest& t = *pending[start + i];
      PredictionRecord& r = results[i];
      r.test_id = t.test_id;
      try {
        r.prediction = predictor.call_predict(read_image(suite_dir / t.premise), t.hypothesis);
      } catch (const Error& e) {
        r.error = std::string(e.reason());
      }
    });
    for (auto& r : results) {
      if (r.prediction) {
        ++summary.predicted;
      } else {
        ++summary.failed;
      }
      done[r.test_id] = std::move(r);
    }
    write_predictions(pred_path, done);
  }
  if (pending.empty()) write_predictions(pred_path, done);
  return summary;
}

// ---- detect / report -------------------------------------------------------

std::optional<double> MrStats::ifr() const { return ratio(inum, gnum); }

std::optional<double> RunReport::ifr() const { return ratio(inum, gnum); }

std::optional<double> RunReport::accuracy() const { return ratio(gnum - inum, gnum); }

json to_json(const RunReport& r) {
  json per_mr = json::object();
  for (const auto& [mr, s] : r.per_mr) {
    per_mr[std::string(to_string(mr))] = {
        {"generated", s.generated}, {"gnum", s.gnum}, {"inum", s.inum}, {"ifr", optional_json(s.ifr())}};
  }
  json metadata = json::object();
  for (const auto& [role, m] : r.backend_metadata) metadata[role] = m;
  return {{"records", r.records},
          {"processed", r.processed},
          {"generated", r.generated},
          {"gnum", r.gnum},
          {"inum", r.inum},
          {"ifr", optional_json(r.ifr())},
          {"accuracy", optional_json(r.accuracy())},
          {"per_mr", per_mr},
          {"skips", counts_json(r.skips)},
          {"prompt_template", {{"version", r.prompt_version}, {"sha256", r.prompt_sha256}}},
          {"backends", metadata},
          {"vtr", r.vtr ? to_json(*r.vtr) : json(nullptr)}};
}

RunReport run_report_from_json(const json& j) {
  RunReport r;
  try {
    r.records = j.at("records").get<std::size_t>();
    r.processed = j.at("processed").get<std::size_t>();
    r.generated = j.at("generated").get<std::size_t>();
    r.gnum = j.at("gnum").get<std::size_t>();
    r.inum = j.at("inum").get<std::size_t>();
    const json& per_mr = j.at("per_mr");
    for (auto it = per_mr.begin(); it != per_mr.end(); ++it) {
      r.per_mr[mr_from_json(it.key())] = {it.value().at("generated").get<std::size_t>(),
                                          it.value().at("gnum").get<std::size_t>(),
                                          it.value().at("inum").get<std::size_t>()};
    }
    r.skips = counts_from_json(j.at("skips"));
    r.prompt_version = j.at("prompt_template").at("version").get<std::string>();
    r.prompt_sha256 = j.at("prompt_template").at("sha256").get<std::string>();
    const json& b = j.at("backends");
    for (auto it = b.begin(); it != b.end(); ++it) {
      r.backend_metadata[it.key()] = it.value().get<std::string>();
    }
    if (j.contains("vtr") && !j["vtr"].is_null()) r.vtr = vtr_result_from_json(j["vtr"]);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidation, fmt::format("bad report: {}", e.what()));
  }
  if (r.inum > r.gnum) throw Error(ErrorCode::kValidation, "report has inum > gnum");
  return r;
}

Detection detect_issues(const std::vector<GeneratedTest>& suite,
                        const std::vector<PredictionRecord>& predictions,
                        const GenerationSummary& generation) {
  std::map<std::string, const PredictionRecord*> by_id;
  for (const auto& p : predictions) by_id[p.test_id] = &p;

  Detection d;
  RunReport& r = d.report;
  r.records = generation.records;
  r.processed = generation.processed;
  r.prompt_version = generation.prompt_version;
  r.prompt_sha256 = generation.prompt_sha256;
  r.backend_metadata = generation.backend_metadata;
  merge(r.skips, generation.skipped);
  merge(r.skips, generation.unit_skips);
  merge(r.skips, generation.instantiation_skips);
  merge(r.skips, generation.warnings);
  for (const auto& [mr, n] : generation.generated) r.per_mr[mr];

  std::vector<const GeneratedTest*> ordered;
  for (const auto& t : suite) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->test_id < b->test_id; });

  for (const GeneratedTest* t : ordered) {
    MrStats& s = r.per_mr[t->mr];
    ++s.generated;
    ++r.generated;
    auto it = by_id.find(t->test_id);
    if (it == by_id.end()) {
      ++r.skips["test.not_executed"];
      continue;
    }
    if (!it->second->prediction) {
      ++r.skips[prefixed("test.unpredicted", it->second->error)];
      continue;
    }
    ++s.gnum;
    ++r.gnum;
    const Label predicted = it->second->prediction->label;
    if (predicted != t->oracle) {
      ++s.inum;
      ++r.inum;
      d.issues.push_back({*t, predicted});
    }
  }
  return d;
}

Detection detect_issues(const fs::path& suite_dir) {
  const auto suite = read_manifest(suite_dir / kManifestFile);
  const fs::path pred_path = suite_dir / kPredictionsFile;
  const auto predictions = fs::exists(pred_path) ? read_predictions(pred_path)
                                                 : std::vector<PredictionRecord>{};
  const auto generation = generation_summary_from_json(read_json_file(suite_dir / kGenerationFile));

  Detection d = detect_issues(suite, predictions, generation);
  if (fs::exists(suite_dir / kVtrFile)) {
    d.report.vtr = vtr_result_from_json(read_json_file(suite_dir / kVtrFile));
  }

  std::string issues;
  for (const auto& issue : d.issues) {
    json j = {{"test_id", issue.test.test_id},   {"source_id", issue.test.source_id},
              {"mr", to_string(issue.test.mr)},  {"premise", issue.test.premise},
              {"hypothesis", issue.test.hypothesis}, {"oracle", to_string(issue.test.oracle)},
              {"predicted", to_string(issue.predicted)}};
    issues += j.dump() + "\n";
  }
  write_if_changed(suite_dir / kIssuesFile, issues);
  write_if_changed(suite_dir / kReportJsonFile, to_json(d.report).dump(2) + "\n");
  return d;
}

std::string format_percent(std::optional<double> ratio) {
  if (!ratio) return "n/a";
  return fmt::format("{:.1f}%", *ratio * 100.0);
}

std::string render_markdown(const RunReport& r) {
  std::ostringstream md;
  md << "# Run report\n\n";
  md << "| MR | Generated | GNUM | INUM | IFR |\n";
  md << "|----|----------:|-----:|-----:|----:|\n";
  for (const auto& [mr, s] : r.per_mr) {
    md << fmt::format("| {} | {} | {} | {} | {} |\n", to_string(mr), s.generated, s.gnum, s.inum,
                      format_percent(s.ifr()));
  }
  md << fmt::format("| **Total** | {} | {} | {} | {} |\n\n", r.generated, r.gnum, r.inum,
                    format_percent(r.ifr()));

  md << fmt::format("- Records: {} ({} processed)\n", r.records, r.processed);
  md << fmt::format("- Accuracy against oracles: {}\n", format_percent(r.accuracy()));
  if (r.vtr) {
    md << fmt::format("- VTR: {} ({} valid, {} invalid)\n", format_percent(r.vtr->vtr),
                      r.vtr->valid, r.vtr->invalid);
  } else {
    md << "- VTR: n/a\n";
  }
  md << fmt::format("- Prompt template: {} (sha256 {})\n", r.prompt_version, r.prompt_sha256);

  if (!r.skips.empty()) {
    md << "\n## Skips\n\n| Reason | Count |\n|--------|------:|\n";
    for (const auto& [reason, n] : r.skips) md << fmt::format("| {} | {} |\n", reason, n);
  }
  if (!r.backend_metadata.empty()) {
    md << "\n## Backends\n\n| Role | Metadata |\n|------|----------|\n";
    for (const auto& [role, m] : r.backend_metadata) {
      md << fmt::format("| {} | {} |\n", role, m.empty() ? "-" : m);
    }
  }
  return md.str();
}

std::string write_report(const fs::path& suite_dir) {
  RunReport r = run_report_from_json(read_json_file(suite_dir / kReportJsonFile));
  if (fs::exists(suite_dir / kVtrFile)) {
    r.vtr = vtr_result_from_json(read_json_file(suite_dir / kVtrFile));
    write_if_changed(suite_dir / kReportJsonFile, to_json(r).dump(2) + "\n");
  }
  std::string md = render_markdown(r);
  write_if_changed(suite_dir / kReportMdFile, md);
  return md;
}

// ---- review and retraining files -------------------------------------------

VtrSheet sample_vtr(const fs::path& suite_dir, std::size_t n, std::uint64_t seed,
                    const fs::path& sheet_path) {
  VtrSheet sheet = sample_vtr(read_manifest(suite_dir / kManifestFile), n, seed);
  write_atomic(sheet_path, to_json(sheet).dump(2) + "\n");
  return sheet;
}

VtrResult ingest_vtr(const fs::path& sheet_path, const fs::path& suite_dir) {
  VtrResult r = compute_vtr(vtr_sheet_from_json(read_json_file(sheet_path)));
  write_atomic(suite_dir / kVtrFile, to_json(r).dump(2) + "\n");
  return r;
}

SplitSizes split_suite(const fs::path& suite_dir, SplitRatio ratio, std::uint64_t seed,
                       const fs::path& out_dir) {
  SplitResult split = split_retrain(read_manifest(suite_dir / kManifestFile), ratio, seed);
  SplitSizes sizes{split.improve.size(), split.eval.size()};
  write_manifest(out_dir / "improve.jsonl", std::move(split.improve));
  write_manifest(out_dir / "eval.jsonl", std::move(split.eval));
  return sizes;
}

// ---- end-to-end ------------------------------------------------------------

PipelineResult run_pipeline(const RunConfig& config, const Backends& backends) {
  PipelineResult result;
  result.generation = generate(config, backends);
  result.execution = execute(config.output_dir, backends.at(Role::kPredict), config.workers);
  result.detection = detect_issues(config.output_dir);
  write_report(config.output_dir);
  return result;
}

bool SelftestResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

SelftestResult run_selftest(const SelftestOptions& options) {
  const fs::path work = options.work_dir.empty()
                            ? fs::temp_directory_path() / fmt::format("vemorph-selftest-{}", options.seed)
                            : options.work_dir;
  synthetic::CorpusOptions corpus_options;
  corpus_options.scenes = options.scenes;
  corpus_options.seed = options.seed;
  const synthetic::Corpus corpus = synthetic::write_corpus(work / "corpus", corpus_options);

  RunConfig config = RunConfig::with_backend(options.backend_url);
  config.dataset = work / "corpus" / "dataset.jsonl";
  config.image_dir = work / "corpus";
  config.output_dir = work / "suite";
  config.workers = options.workers;
  config.seed = options.seed;

  const Backends backends(config, synthetic::standard_registry());
  const PipelineResult run = run_pipeline(config, backends);

  SelftestResult result;
  result.report = run.detection.report;
  const RunReport& r = result.report;

  std::map<MrKind, std::size_t> expected;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    const std::size_t k = corpus.samples[i].mentioned.size();
    const std::size_t n = corpus.scenes[i].objects.size();
    if (k >= 2) expected[MrKind::kMr1] += k;
    expected[MrKind::kMr2] += k;
    expected[MrKind::kMr3] += n - k;
  }
  std::string counts;
  bool counts_ok = true;
  for (MrKind mr : kAllMrs) {
    const std::size_t got = r.per_mr.count(mr) ? r.per_mr.at(mr).generated : 0;
    counts_ok = counts_ok && got == expected[mr];
    counts += fmt::format("{}{} {}/{}", counts.empty() ? "" : ", ", to_string(mr), got, expected[mr]);
  }

  result.checks.push_back({"every record processed", r.processed == r.records && r.records == corpus.samples.size(),
                           fmt::format("{} of {} processed", r.processed, r.records)});
  result.checks.push_back({"generated counts match ground truth", counts_ok, counts});
  result.checks.push_back({"every test predicted", r.gnum == r.generated,
                           fmt::format("{} of {} predicted", r.gnum, r.generated)});
  result.checks.push_back({"reference VE raises no issues", r.inum == 0 && r.gnum > 0,
                           fmt::format("inum {} over gnum {}", r.inum, r.gnum)});
  return result;
}

}  // namespace vemorph
