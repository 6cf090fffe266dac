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

#include "vemorph/backends/service.hpp"

#include <sstream>

#include <fmt/format.h>

#include "vemorph/error.hpp"
#include "vemorph/resources.hpp"
#include "vemorph/text.hpp"

namespace vemorph::backends {
namespace {

HttpResponse reply(int status, const json& body) { return {status, body.dump()}; }

template <typename Model>
const Model& require(const std::shared_ptr<const Model>& model) {
  if (!model) throw std::logic_error("role not enabled");
  return *model;
}

}  // namespace

Service::Service(ModelSet models) : models_(std::move(models)) {}

std::vector<Role> Service::roles() const {
  std::vector<Role> out;
  if (models_.extract) out.push_back(Role::kExtract);
  if (models_.detect) out.push_back(Role::kDetect);
  if (models_.ground) out.push_back(Role::kGround);
  if (models_.inpaint) out.push_back(Role::kInpaint);
  if (models_.synonym) out.push_back(Role::kSynonym);
  if (models_.predict) out.push_back(Role::kPredict);
  return out;
}

HttpResponse Service::handle(const HttpRequest& request) const {
  if (request.path == "/v1/health") {
    if (request.method != "GET") {
      return reply(405, wire::error_body("method_not_allowed", "use GET"));
    }
    return reply(200, wire::health_response({"ok", roles(), models_.metadata}));
  }

  std::optional<Role> role;
  for (Role r : roles()) {
    if (endpoint_path(r) == request.path) role = r;
  }
  if (!role) {
    return reply(404, wire::error_body("not_found",
                                       fmt::format("no endpoint {}", request.path)));
  }
  if (request.method != "POST") {
    return reply(405, wire::error_body("method_not_allowed", "use POST"));
  }

  json body;
  try {
    body = json::parse(request.body);
  } catch (const json::exception& e) {
    return reply(400, wire::error_body("bad_request", fmt::format("invalid JSON: {}", e.what())));
  }
  try {
    return reply(200, dispatch(*role, body));
  } catch (const SchemaViolation& e) {
    return reply(400, wire::error_body("bad_request", e.what()));
  } catch (const Error& e) {
    return reply(422, wire::error_body(e.reason(), e.what()));
  } catch (const std::exception& e) {
    return reply(500, wire::error_body("internal", e.what()));
  }
}

json Service::dispatch(Role role, const json& body) const {
  switch (role) {
    case Role::kExtract:
      return wire::extract_response(
          require(models_.extract).extract(wire::decode_extract_request(body)));
    case Role::kDetect: {
      const Image image = image_from_payload(wire::decode_detect_request(body));
      return wire::detect_response(require(models_.detect).detect(image));
    }
    case Role::kGround: {
      const auto req = wire::decode_ground_request(body);
      return wire::ground_response(
          require(models_.ground).ground(image_from_payload(req.image), req.text));
    }
    case Role::kInpaint: {
      const auto req = wire::decode_inpaint_request(body);
      const Image image = image_from_payload(req.image);
      const Mask mask = mask_from_payload(req.mask);
      if (mask.dims() != image.dims()) throw SchemaViolation("mask and image sizes differ");
      return wire::inpaint_response(to_payload(require(models_.inpaint).inpaint(image, mask)));
    }
    case Role::kSynonym:
      return wire::synonym_response(
          require(models_.synonym).substitute(wire::decode_synonym_request(body)));
    case Role::kPredict: {
      const auto req = wire::decode_predict_request(body);
      return wire::predict_response(
          require(models_.predict).predict(image_from_payload(req.image), req.hypothesis));
    }
  }
  throw std::logic_error("unhandled role");
}

LexiconSynonymizer LexiconSynonymizer::parse(std::string_view tsv) {
  LexiconSynonymizer lex;
  std::istringstream in{std::string(tsv)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto tab = trimmed.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, fmt::format("synonym lexicon line {} has no tab", line_no));
    }
    std::string from = text::to_lower(text::trim(trimmed.substr(0, tab)));
    std::string to(text::trim(trimmed.substr(tab + 1)));
    if (from.empty() || to.empty()) {
      throw Error(ErrorCode::kConfig, fmt::format("synonym lexicon line {} is empty", line_no));
    }
    lex.entries_[std::move(from)] = std::move(to);
  }
  return lex;
}

const LexiconSynonymizer& LexiconSynonymizer::builtin() {
  static const LexiconSynonymizer lex = parse(resources::synonym_lexicon());
  return lex;
}

SynonymResult LexiconSynonymizer::substitute(const std::string& input) const {
  std::size_t i = 0;
  while (i < input.size()) {
    while (i < input.size() && !text::is_word_char(input[i])) ++i;
    std::size_t j = i;
    while (j < input.size() && text::is_word_char(input[j])) ++j;
    if (j > i) {
      const std::string word = input.substr(i, j - i);
      auto it = entries_.find(text::to_lower(word));
      if (it != entries_.end()) {
        std::string out = input;
        out.replace(i, j - i, it->second);
        return {std::move(out), {{word, it->second}}};
      }
    }
    i = j;
  }
  return {input, {}};
}

void ServiceRegistry::add(std::string name, Factory factory) {
  factories_[std::move(name)] = std::move(factory);
}

bool ServiceRegistry::contains(std::string_view name) const {
  return factories_.find(name) != factories_.end();
}

std::shared_ptr<const Service> ServiceRegistry::resolve(std::string_view url) const {
  if (!url.starts_with(kInProcessScheme)) {
    throw Error(ErrorCode::kConfig, fmt::format("'{}' is not an in-process URL", url));
  }
  std::string_view rest = url.substr(kInProcessScheme.size());
  Params params;
  const auto q = rest.find('?');
  std::string_view name = rest.substr(0, q);
  if (q != std::string_view::npos) {
    std::string_view query = rest.substr(q + 1);
    while (!query.empty()) {
      const auto amp = query.find('&');
      std::string_view kv = query.substr(0, amp);
      const auto eq = kv.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::kConfig, fmt::format("bad parameter '{}' in '{}'", kv, url));
      }
      params[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
      query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
    }
  }
  auto it = factories_.find(name);
  if (it == factories_.end()) {
    throw Error(ErrorCode::kConfig, fmt::format("unknown in-process backend '{}'", name));
  }
  return it->second(params);
}

}  // namespace vemorph::backends
