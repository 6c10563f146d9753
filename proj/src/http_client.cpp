// src/http_client.cpp

// Copyright 2026 The FCM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "http_client.hpp"

#include "error.hpp"
#include "httplib.h"

namespace fcm {

namespace {

struct Target {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Target SplitEndpoint(const std::string &endpoint, const std::string &route) {
  size_t scheme = endpoint.find("://");
  if (scheme == std::string::npos)
    Fail(ErrorCode::kInvalidArgument, "endpoint '" + endpoint + "' has no scheme");
  size_t slash = endpoint.find('/', scheme + 3);
  Target t;
  t.base = endpoint.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  bool has_route = prefix.size() >= route.size() &&
                   prefix.compare(prefix.size() - route.size(), route.size(), route) == 0;
  t.path = has_route ? prefix : prefix + route;
  return t;
}

}  // namespace

nlohmann::json PostJson(const std::string &endpoint, const std::string &route,
                        const nlohmann::json &body, std::chrono::milliseconds timeout) {
  Target target = SplitEndpoint(endpoint, route);
  httplib::Client client(target.base);
  if (!client.is_valid())
    Fail(ErrorCode::kInvalidArgument, "endpoint '" + endpoint + "' is not a valid URL");
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  auto started = std::chrono::steady_clock::now();
  httplib::Result res = client.Post(target.path, body.dump(), "application/json");
  auto elapsed = std::chrono::steady_clock::now() - started;
  if (!res) {
    httplib::Error err = res.error();
    bool timed_out = err == httplib::Error::ConnectionTimeout ||
                     ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                      elapsed >= timeout * 9 / 10);
    if (timed_out)
      Fail(ErrorCode::kTimeout, "request to " + endpoint + " timed out after " +
                                    std::to_string(timeout.count()) + " ms");
    Fail(ErrorCode::kNetwork,
         "cannot reach " + endpoint + " (" + httplib::to_string(err) + ")");
  }
  if (res->status != 200)
    Fail(ErrorCode::kBadResponse,
         endpoint + " answered HTTP " + std::to_string(res->status) + " for " + target.path);
  nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object())
    Fail(ErrorCode::kBadResponse, endpoint + " returned a body that is not a JSON object");
  return reply;
}

}  // namespace fcm
