// tests/test_wire.cpp

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

#include "doctest.h"
#include "wire_golden.hpp"

using namespace fcm::testing;

TEST_SUITE("wire") {
  TEST_CASE("scorer golden exchanges") {
    auto results = ReplayScorerGolden(FCM_GOLDEN_DIR "/scorer_wire.json");
    CHECK(results.size() >= 10);
    for (const auto &r : results) {
      INFO(r.name, ": ", r.detail);
      CHECK(r.ok);
    }
  }

  TEST_CASE("summarizer golden exchanges") {
    auto results = ReplaySummarizerGolden(FCM_GOLDEN_DIR "/summarizer_wire.json");
    CHECK(results.size() >= 6);
    for (const auto &r : results) {
      INFO(r.name, ": ", r.detail);
      CHECK(r.ok);
    }
  }
}
