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

#ifndef VEMORPH_BACKENDS_CLIENT_HPP_
#define VEMORPH_BACKENDS_CLIENT_HPP_

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "vemorph/backends/service.hpp"
#include "vemorph/backends/transport.hpp"

namespace vemorph::backends {

struct BackendEndpoint {
  Role role = Role::kExtract;
  // "http://host:port[/prefix]" or "inprocess:<name>[?k=v&...]".
  std::string base_url;
  int timeout_ms = 30000;
  int retries = 2;
  int max_concurrency = 4;
  bool cache_groundings = true;
  // kPngBase64, or kLocalPath to hand the backend file paths under
  // `scratch_dir` instead of inline images.
  std::string payload_encoding{kPngBase64};
  std::filesystem::path scratch_dir;
};

// Re-attempts wait base, base*factor, base*factor^2, ...
struct RetryPolicy {
  std::chrono::milliseconds base{100};
  int factor = 2;
};

// Protocol client for one endpoint. Copies share the concurrency limit and
// the grounding cache; all members are safe to call from many threads.
//
// Every response is schema-checked before it is returned: violations raise
// Error(kBackendMalformed). Connection failures, timeouts and 5xx answers are
// retried up to `retries` times, then raise kBackendUnavailable or kTimeout.
// 4xx answers raise kBackendRejected without retrying.
class BackendClient {
 public:
  BackendClient(BackendEndpoint endpoint, std::shared_ptr<const Transport> transport,
                RetryPolicy policy = {});

  // Chooses InProcessTransport or HttpTransport from the URL scheme.
  static BackendClient connect(const BackendEndpoint& endpoint,
                               const ServiceRegistry& registry, RetryPolicy policy = {});

  const BackendEndpoint& endpoint() const noexcept { return endpoint_; }

  std::string call_extract(const std::string& prompt) const;
  std::vector<RawBox> call_detect(const Image& image) const;
  Grounding call_ground(const Image& image, const std::string& text) const;
  Image call_inpaint(const Image& image, const Mask& mask) const;
  SynonymResult call_synonym(const std::string& text) const;
  Prediction call_predict(const Image& image, const std::string& hypothesis) const;
  Health health() const;

  std::size_t cache_hits() const noexcept;

 private:
  struct State;

  json post(Role role, const json& body) const;
  HttpResponse send_with_retries(const HttpRequest& request) const;
  ImagePayload payload(const Image& image) const;
  ImagePayload payload(const Mask& mask) const;
  void expect_role(Role role) const;

  BackendEndpoint endpoint_;
  std::shared_ptr<const Transport> transport_;
  RetryPolicy policy_;
  std::shared_ptr<State> state_;
};

}  // namespace vemorph::backends

#endif  // VEMORPH_BACKENDS_CLIENT_HPP_
