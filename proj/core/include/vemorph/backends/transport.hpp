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

#ifndef VEMORPH_BACKENDS_TRANSPORT_HPP_
#define VEMORPH_BACKENDS_TRANSPORT_HPP_

#include <chrono>
#include <memory>
#include <string>

#include "vemorph/backends/service.hpp"

namespace vemorph::backends {

// Carries one request to a backend. Throws Error(kBackendUnavailable) when the
// backend cannot be reached and Error(kTimeout) when it does not answer in
// time; any HTTP status is returned as-is.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse send(const HttpRequest& request,
                            std::chrono::milliseconds timeout) const = 0;
};

class InProcessTransport final : public Transport {
 public:
  explicit InProcessTransport(std::shared_ptr<const Service> service)
      : service_(std::move(service)) {}

  HttpResponse send(const HttpRequest& request,
                    std::chrono::milliseconds timeout) const override;

 private:
  std::shared_ptr<const Service> service_;
};

// HTTP/1.1 client; `base_url` is "http://host:port[/prefix]".
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::string base_url);

  HttpResponse send(const HttpRequest& request,
                    std::chrono::milliseconds timeout) const override;

 private:
  std::string origin_;
  std::string prefix_;
};

// Serves a Service over HTTP on a background thread.
class HttpServiceHost {
 public:
  // port 0 binds an ephemeral port.
  explicit HttpServiceHost(std::shared_ptr<const Service> service,
                           std::string host = "127.0.0.1", int port = 0);
  ~HttpServiceHost();
  HttpServiceHost(const HttpServiceHost&) = delete;
  HttpServiceHost& operator=(const HttpServiceHost&) = delete;

  int port() const noexcept { return port_; }
  std::string base_url() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
};

}  // namespace vemorph::backends

#endif  // VEMORPH_BACKENDS_TRANSPORT_HPP_
