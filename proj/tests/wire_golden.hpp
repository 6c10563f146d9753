// tests/wire_golden.hpp

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

// Replays the recorded exchanges in tests/golden/*.json against the remote
// clients. Each case names the call, the canned server reply and the
// expected outcome: a value, or an error code by name.

#ifndef FCM_TESTS_WIRE_GOLDEN_HPP_
#define FCM_TESTS_WIRE_GOLDEN_HPP_

#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "error.hpp"
#include "json.hpp"
#include "mock_server.hpp"
#include "scorers.hpp"
#include "summeval.hpp"

namespace fcm::testing {

inline const char *ErrorName(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kNetwork: return "network";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kBadResponse: return "bad_response";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kGuardTripped: return "guard_tripped";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

struct GoldenOutcome {
  std::string file;
  std::string name;
  bool ok = false;
  std::string detail;  // why it failed
};

inline nlohmann::json LoadGolden(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open golden file " + path);
  return nlohmann::json::parse(in);
}

namespace detail {

inline void Serve(const nlohmann::json &response, httplib::Response &res) {
  if (int delay = response.value("delay_ms", 0); delay > 0)
    std::this_thread::sleep_for(std::chrono::milliseconds(delay));
  res.status = response.value("status", 200);
  if (response.contains("raw"))
    res.set_content(response["raw"].get<std::string>(), "text/plain");
  else
    res.set_content(response["body"].dump(), "application/json");
}

// Runs `call` against a fresh server (or a dead port) and grades the result.
template <typename Call>
GoldenOutcome Replay(const std::string &file, const std::string &route, const nlohmann::json &c,
                     Call call) {
  GoldenOutcome out{file, c.at("name").get<std::string>()};
  std::optional<MockServer> server;
  std::mutex mu;
  std::vector<nlohmann::json> seen;
  std::string url;
  if (c.value("unreachable", false)) {
    url = UnusedUrl();
  } else {
    server.emplace();
    nlohmann::json response = c.at("response");
    server->On(route, [&, response](const nlohmann::json &req, httplib::Response &res) {
      {
        std::lock_guard<std::mutex> lock(mu);
        seen.push_back(req);
      }
      Serve(response, res);
    });
    url = server->url();
  }
  const auto timeout = std::chrono::milliseconds(c.value("timeout_ms", 2000));
  const nlohmann::json &expect = c.at("expect");

  std::optional<nlohmann::json> value;
  std::optional<Error> error;
  try {
    value = call(url, timeout);
  } catch (const Error &e) {
    error = e;
  }

  if (expect.contains("error")) {
    const std::string want = expect["error"].get<std::string>();
    if (!error) {
      out.detail = "expected " + want + ", got value " + value->dump();
      return out;
    }
    if (want != ErrorName(error->code())) {
      out.detail = "expected " + want + ", got " + ErrorName(error->code()) + ": " + error->what();
      return out;
    }
    if (expect.value("message_names_endpoint", false) &&
        std::string(error->what()).find(url) == std::string::npos) {
      out.detail = std::string("message does not name the endpoint: ") + error->what();
      return out;
    }
  } else {
    if (error) {
      out.detail = std::string("unexpected ") + ErrorName(error->code()) + ": " + error->what();
      return out;
    }
    const nlohmann::json &want = expect.at("value");
    bool same = want.is_number() ? value->is_number() && *value == want.get<double>()
                                 : *value == want;
    if (!same) {
      out.detail = "expected " + want.dump() + ", got " + value->dump();
      return out;
    }
  }

  if (c.contains("expect_request")) {
    std::lock_guard<std::mutex> lock(mu);
    if (seen.size() != 1) {
      out.detail = "expected one request, saw " + std::to_string(seen.size());
      return out;
    }
    if (seen[0] != c["expect_request"]) {
      out.detail = "request body " + seen[0].dump() + " != " + c["expect_request"].dump();
      return out;
    }
  }
  out.ok = true;
  return out;
}

}  // namespace detail

inline std::vector<GoldenOutcome> ReplayScorerGolden(const std::string &path) {
  nlohmann::json g = LoadGolden(path);
  std::vector<GoldenOutcome> out;
  for (const auto &c : g.at("cases"))
    out.push_back(detail::Replay(path, g.at("route"), c, [&](const std::string &url, auto timeout) {
      const auto &call = c.at("call");
      return nlohmann::json(RemoteScore(url, call.at("hypothesis"), call.at("reference"), timeout));
    }));
  return out;
}

inline std::vector<GoldenOutcome> ReplaySummarizerGolden(const std::string &path) {
  nlohmann::json g = LoadGolden(path);
  std::vector<GoldenOutcome> out;
  for (const auto &c : g.at("cases"))
    out.push_back(detail::Replay(path, g.at("route"), c, [&](const std::string &url, auto timeout) {
      const auto &call = c.at("call");
      RemoteSummarizer s(url, timeout);
      SummarizerParams p = SummarizerParams::FromJson(call.at("params"), {});
      return nlohmann::json(s.Summarize(call.at("prompt").get<std::string>(), p));
    }));
  return out;
}

}  // namespace fcm::testing

#endif  // FCM_TESTS_WIRE_GOLDEN_HPP_
