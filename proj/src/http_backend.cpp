// Copyright 2026 The tkg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cstdlib>
#include <thread>

#include "tkg/backend.hpp"

namespace tkg {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument("backend endpoint must be an absolute URL: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw InvalidArgument("unsupported endpoint scheme: " + scheme);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

HttpBackend::HttpBackend(BackendConfig config)
    : config_(std::move(config)), templates_(PromptTemplates::load(config_.prompt_dir)) {
  config_.validate();
  split_endpoint(config_.endpoint);
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  in_flight_ = std::make_unique<std::counting_semaphore<>>(
      static_cast<std::ptrdiff_t>(config_.max_in_flight));
}

HttpBackend::~HttpBackend() = default;

json HttpBackend::request_body(RequestKind kind, const json& request, bool repair) const {
  std::string user = render_prompt(templates_, kind, request);
  if (repair) user += templates_.repair;
  return {{"model", config_.model},
          {"temperature", config_.temperature},
          {"messages",
           json::array({{{"role", "system"}, {"content", templates_.system}},
                        {{"role", "user"}, {"content", std::move(user)}}})}};
}

std::string HttpBackend::complete(RequestKind kind, const json& request, bool repair) {
  const Endpoint endpoint = split_endpoint(config_.endpoint);
  const std::string body = request_body(kind, request, repair).dump();

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Result res;
    {
      SlotGuard slot(*in_flight_);
      httplib::Client client(endpoint.origin);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
      const auto usecs =
          std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      res = client.Post(endpoint.path, headers, body, "application/json");
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status);
      if (!retryable(res->status)) break;
      continue;
    }
    const json envelope = json::parse(res->body, nullptr, false);
    try {
      return envelope.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw MalformedResponse("chat-completions envelope without message content");
    }
  }
  throw BackendUnavailable(config_.endpoint + ": " + last_error);
}

}  // namespace tkg
