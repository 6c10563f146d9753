// src/http_client.hpp

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

#ifndef FCM_HTTP_CLIENT_HPP_
#define FCM_HTTP_CLIENT_HPP_

#include <chrono>
#include <string>

#include "json.hpp"

namespace fcm {

/// POSTs `body` as JSON to endpoint + route and returns the parsed reply.
///
/// Failures map onto distinct error codes: kNetwork (cannot connect or the
/// exchange broke), kTimeout (no reply within `timeout`), kBadResponse
/// (non-200 status or a body that is not a JSON object). Every message names
/// the endpoint. An endpoint already ending in `route` is used as is.
nlohmann::json PostJson(const std::string &endpoint, const std::string &route,
                        const nlohmann::json &body, std::chrono::milliseconds timeout);

}  // namespace fcm

#endif  // FCM_HTTP_CLIENT_HPP_
