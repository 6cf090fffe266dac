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

#ifndef VEMORPH_BACKENDS_SERVICE_HPP_
#define VEMORPH_BACKENDS_SERVICE_HPP_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vemorph/backends/protocol.hpp"

namespace vemorph::backends {

// Model-side interfaces. Implementations must be safe to call concurrently.
// Throwing vemorph::Error maps to HTTP 422 with the error's reason code.
class ExtractModel {
 public:
  virtual ~ExtractModel() = default;
  virtual std::string extract(const std::string& prompt) const = 0;
};

class DetectModel {
 public:
  virtual ~DetectModel() = default;
  virtual std::vector<RawBox> detect(const Image& image) const = 0;
};

class GroundModel {
 public:
  virtual ~GroundModel() = default;
  virtual Grounding ground(const Image& image, const std::string& text) const = 0;
};

class InpaintModel {
 public:
  virtual ~InpaintModel() = default;
  virtual Image inpaint(const Image& image, const Mask& mask) const = 0;
};

class SynonymModel {
 public:
  virtual ~SynonymModel() = default;
  virtual SynonymResult substitute(const std::string& text) const = 0;
};

class PredictModel {
 public:
  virtual ~PredictModel() = default;
  virtual Prediction predict(const Image& image, const std::string& hypothesis) const = 0;
};

// Any subset of roles may be populated.
struct ModelSet {
  std::shared_ptr<const ExtractModel> extract;
  std::shared_ptr<const DetectModel> detect;
  std::shared_ptr<const GroundModel> ground;
  std::shared_ptr<const InpaintModel> inpaint;
  std::shared_ptr<const SynonymModel> synonym;
  std::shared_ptr<const PredictModel> predict;
  std::string metadata;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::string body;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Server side of the protocol: validates requests, dispatches to models, and
// serializes responses. Stateless apart from the read-only model set.
class Service {
 public:
  explicit Service(ModelSet models);

  HttpResponse handle(const HttpRequest& request) const;
  std::vector<Role> roles() const;

 private:
  json dispatch(Role role, const json& body) const;

  ModelSet models_;
};

// Replaces the first whole-word match of the first lexicon entry found in
// text order.
class LexiconSynonymizer final : public SynonymModel {
 public:
  // Lines "word<TAB>replacement"; '#' starts a comment.
  static LexiconSynonymizer parse(std::string_view tsv);
  static const LexiconSynonymizer& builtin();

  SynonymResult substitute(const std::string& text) const override;
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

class IdentitySynonymizer final : public SynonymModel {
 public:
  SynonymResult substitute(const std::string& text) const override { return {text, {}}; }
};

// Maps "inprocess:<name>[?k=v&...]" endpoint URLs to services.
class ServiceRegistry {
 public:
  using Params = std::map<std::string, std::string>;
  using Factory = std::function<std::shared_ptr<const Service>(const Params&)>;

  void add(std::string name, Factory factory);
  // Throws Error(kConfig) for unknown names.
  std::shared_ptr<const Service> resolve(std::string_view url) const;
  bool contains(std::string_view name) const;

 private:
  std::map<std::string, Factory, std::less<>> factories_;
};

inline constexpr std::string_view kInProcessScheme = "inprocess:";

}  // namespace vemorph::backends

#endif  // VEMORPH_BACKENDS_SERVICE_HPP_
