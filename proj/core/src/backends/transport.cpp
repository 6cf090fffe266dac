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

#include "vemorph/backends/transport.hpp"

#include <thread>

#include <fmt/format.h>

#include "httplib.h"
#include "vemorph/error.hpp"

namespace vemorph::backends {

HttpResponse InProcessTransport::send(const HttpRequest& request,
                                      std::chrono::milliseconds) const {
  return service_->handle(request);
}

HttpTransport::HttpTransport(std::string base_url) {
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos || base_url.substr(0, scheme) != "http") {
    throw Error(ErrorCode::kConfig, fmt::format("unsupported backend URL '{}'", base_url));
  }
  const auto path = base_url.find('/', scheme + 3);
  origin_ = base_url.substr(0, path);
  if (path != std::string::npos) {
    prefix_ = base_url.substr(path);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
}

HttpResponse HttpTransport::send(const HttpRequest& request,
                                 std::chrono::milliseconds timeout) const {
  // One client per request.
  httplib::Client client(origin_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const std::string path = prefix_ + request.path;
  const auto started = std::chrono::steady_clock::now();
  httplib::Result result = request.method == "GET"
                               ? client.Get(path)
                               : client.Post(path, request.body, "application/json");
  if (!result) {
    const auto err = result.error();
    const auto elapsed = std::chrono::steady_clock::now() - started;
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= timeout)) {
      throw Error(ErrorCode::kTimeout,
                  fmt::format("{}{} timed out after {} ms", origin_, path, timeout.count()));
    }
    throw Error(ErrorCode::kBackendUnavailable,
                fmt::format("{}{}: {}", origin_, path, httplib::to_string(err)));
  }
  return {result->status, result->body};
}

struct HttpServiceHost::Impl {
  httplib::Server server;
  std::thread thread;
};

HttpServiceHost::HttpServiceHost(std::shared_ptr<const Service> service, std::string host,
                                 int port)
    : impl_(std::make_unique<Impl>()), host_(std::move(host)) {
  auto handler = [service](const httplib::Request& req, httplib::Response& res) {
    HttpResponse out = service->handle({req.method, req.path, req.body});
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host_);
  } else {
    port_ = impl_->server.bind_to_port(host_, port) ? port : -1;
  }
  if (port_ <= 0) {
    throw Error(ErrorCode::kIo, fmt::format("cannot bind {}:{}", host_, port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

HttpServiceHost::~HttpServiceHost() { stop(); }

void HttpServiceHost::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string HttpServiceHost::base_url() const {
  return fmt::format("http://{}:{}", host_, port_);
}

}  // namespace vemorph::backends
