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

#include "vemorph/backends/client.hpp"

#include <mutex>
#include <semaphore>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "vemorph/error.hpp"
#include "vemorph/io.hpp"

namespace vemorph::backends {

struct BackendClient::State {
  explicit State(int limit) : slots(std::max(1, limit)) {}

  std::counting_semaphore<1024> slots;
  std::mutex cache_mu;
  std::unordered_map<std::string, Grounding> groundings;
  std::atomic<std::size_t> hits{0};
};

namespace {

bool transient_status(int status) { return status >= 500; }

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

BackendClient::BackendClient(BackendEndpoint endpoint,
                             std::shared_ptr<const Transport> transport, RetryPolicy policy)
    : endpoint_(std::move(endpoint)),
      transport_(std::move(transport)),
      policy_(policy),
      state_(std::make_shared<State>(std::min(endpoint_.max_concurrency, 1024))) {
  if (endpoint_.timeout_ms <= 0) {
    throw Error(ErrorCode::kConfig, "backend timeout must be positive");
  }
  if (endpoint_.retries < 0) throw Error(ErrorCode::kConfig, "retries must be >= 0");
}

BackendClient BackendClient::connect(const BackendEndpoint& endpoint,
                                     const ServiceRegistry& registry, RetryPolicy policy) {
  std::shared_ptr<const Transport> transport;
  if (endpoint.base_url.starts_with(kInProcessScheme)) {
    transport = std::make_shared<InProcessTransport>(registry.resolve(endpoint.base_url));
  } else {
    transport = std::make_shared<HttpTransport>(endpoint.base_url);
  }
  return BackendClient(endpoint, std::move(transport), policy);
}

void BackendClient::expect_role(Role role) const {
  if (endpoint_.role != role) {
    throw std::logic_error(fmt::format("endpoint serves '{}', not '{}'",
                                       to_string(endpoint_.role), to_string(role)));
  }
}

HttpResponse BackendClient::send_with_retries(const HttpRequest& request) const {
  const std::chrono::milliseconds timeout{endpoint_.timeout_ms};
  auto delay = policy_.base;
  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= endpoint_.retries;
    try {
      SlotGuard slot(state_->slots);
      HttpResponse response = transport_->send(request, timeout);
      if (!transient_status(response.status) || last) return response;
    } catch (const Error&) {
      if (last) throw;
    }
    std::this_thread::sleep_for(delay);
    delay *= policy_.factor;
  }
}

json BackendClient::post(Role role, const json& body) const {
  expect_role(role);
  const HttpRequest request{"POST", endpoint_path(role), body.dump()};
  const HttpResponse response = send_with_retries(request);
  const std::string where = fmt::format("{}{}", endpoint_.base_url, request.path);
  if (transient_status(response.status)) {
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("{} answered {}: {}", where, response.status, response.body));
  }
  if (response.status == 404) {
    throw Error(ErrorCode::kBackendUnavailable, fmt::format("{} is not served", where));
  }
  if (response.status != 200) {
    throw Error(ErrorCode::kBackendRejected,
                fmt::format("{} answered {}: {}", where, response.status, response.body));
  }
  try {
    return json::parse(response.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendMalformed,
                fmt::format("{} returned invalid JSON: {}", where, e.what()));
  }
}

ImagePayload BackendClient::payload(const Image& image) const {
  if (endpoint_.payload_encoding != kLocalPath) return to_payload(image);
  const auto png = encode_png(image);
  const auto path = endpoint_.scratch_dir / (sha256_hex(png) + ".png");
  if (!std::filesystem::exists(path)) write_atomic(path, png);
  return {std::string(kLocalPath), std::filesystem::absolute(path).string(),
          image.dims().width, image.dims().height};
}

ImagePayload BackendClient::payload(const Mask& mask) const {
  if (endpoint_.payload_encoding != kLocalPath) return to_payload(mask);
  const auto png = encode_png(mask);
  const auto path = endpoint_.scratch_dir / (sha256_hex(png) + ".mask.png");
  if (!std::filesystem::exists(path)) write_atomic(path, png);
  return {std::string(kLocalPath), std::filesystem::absolute(path).string(),
          mask.dims().width, mask.dims().height};
}

template <typename F>
auto checked(const std::string& where, F&& decode) {
  try {
    return decode();
  } catch (const SchemaViolation& e) {
    throw Error(ErrorCode::kBackendMalformed, fmt::format("{}: {}", where, e.what()));
  }
}

std::string BackendClient::call_extract(const std::string& prompt) const {
  const json response = post(Role::kExtract, wire::extract_request(prompt));
  return checked(endpoint_.base_url, [&] { return wire::decode_extract_response(response); });
}

std::vector<RawBox> BackendClient::call_detect(const Image& image) const {
  const json response = post(Role::kDetect, wire::detect_request(payload(image)));
  return checked(endpoint_.base_url, [&] { return wire::decode_detect_response(response); });
}

Grounding BackendClient::call_ground(const Image& image, const std::string& text) const {
  expect_role(Role::kGround);
  // Keyed by content so the cache is independent of the payload encoding.
  std::string key;
  if (endpoint_.cache_groundings) {
    key = sha256_hex(encode_png(image)) + ":" + sha256_hex(text);
    std::lock_guard lock(state_->cache_mu);
    if (auto it = state_->groundings.find(key); it != state_->groundings.end()) {
      ++state_->hits;
      return it->second;
    }
  }
  const json response = post(Role::kGround, wire::ground_request({payload(image), text}));
  Grounding g =
      checked(endpoint_.base_url, [&] { return wire::decode_ground_response(response); });
  if (endpoint_.cache_groundings) {
    std::lock_guard lock(state_->cache_mu);
    state_->groundings.emplace(key, g);
  }
  return g;
}

Image BackendClient::call_inpaint(const Image& image, const Mask& mask) const {
  const json response =
      post(Role::kInpaint, wire::inpaint_request({payload(image), payload(mask)}));
  return checked(endpoint_.base_url, [&] {
    return image_from_payload(wire::decode_inpaint_response(response));
  });
}

SynonymResult BackendClient::call_synonym(const std::string& text) const {
  const json response = post(Role::kSynonym, wire::synonym_request(text));
  return checked(endpoint_.base_url, [&] { return wire::decode_synonym_response(response); });
}

Prediction BackendClient::call_predict(const Image& image, const std::string& hypothesis) const {
  const json response =
      post(Role::kPredict, wire::predict_request({payload(image), hypothesis}));
  return checked(endpoint_.base_url, [&] { return wire::decode_predict_response(response); });
}

Health BackendClient::health() const {
  const HttpResponse response = send_with_retries({"GET", "/v1/health", ""});
  if (response.status != 200) {
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("{} health answered {}", endpoint_.base_url, response.status));
  }
  try {
    return wire::decode_health_response(json::parse(response.body));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendMalformed, e.what());
  } catch (const SchemaViolation& e) {
    throw Error(ErrorCode::kBackendMalformed, e.what());
  }
}

std::size_t BackendClient::cache_hits() const noexcept { return state_->hits.load(); }

}  // namespace vemorph::backends
