// tests/test_summeval.cpp

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

#include <chrono>
#include <random>
#include <set>

#include "doctest.h"
#include "error.hpp"
#include "mock_server.hpp"
#include "summeval.hpp"

using namespace fcm;
using namespace std::chrono_literals;
using fcm::testing::MockServer;

namespace {

Utterance U(const std::string &id, int speaker, double start, const std::string &text = "x",
            const std::string &session = "s1") {
  return {id, session, speaker, start, text};
}

SessionChunk ThreeLines() {
  SessionChunk c;
  c.session = "s1";
  c.utterances = {U("u1", 1, 1, "Hello."), U("u2", 2, 3, "Hi, how are you?"),
                  U("u3", 1, 5, "I'm fine.")};
  return c;
}

}  // namespace

TEST_SUITE("summeval") {
  TEST_CASE("chunking by start time") {
    CHECK(ChunkSession({}).empty());
    auto one = ChunkSession({U("a", 1, 0), U("b", 2, 30.5), U("c", 1, 59.9)});
    CHECK(one.size() == 1);
    auto three = ChunkSession({U("a", 1, 10), U("b", 1, 70), U("c", 1, 130)});
    REQUIRE(three.size() == 3);
    for (const auto &c : three) CHECK(c.utterances.size() == 1);
    CHECK(three[1].start == 60.0);
    CHECK(three[1].end == 120.0);
    CHECK_THROWS_AS(ChunkSession({U("a", 1, 0, "", "x"), U("b", 1, 1, "", "y")}), Error);
  }

  TEST_CASE("chunks partition the utterances") {
    std::mt19937 eng(2);
    std::vector<Utterance> all;
    for (int k = 0; k < 300; ++k)
      all.push_back(U("u" + std::to_string(k), 1 + static_cast<int>(eng() % 4),
                      std::uniform_real_distribution<double>(0, 600)(eng), "x",
                      "s" + std::to_string(eng() % 3)));
    auto chunks = ChunkAll(all);
    std::multiset<std::string> ids;
    for (const auto &c : chunks) {
      for (const auto &u : c.utterances) {
        ids.insert(u.id);
        CHECK(u.session == c.session);
        CHECK(u.start_s >= c.start);
        CHECK(u.start_s < c.end);
      }
      for (size_t k = 1; k < c.utterances.size(); ++k)
        CHECK(c.utterances[k - 1].start_s <= c.utterances[k].start_s);
    }
    CHECK(ids.size() == all.size());
    CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == all.size());
    for (size_t i = 0; i < chunks.size(); ++i)
      for (size_t j = i + 1; j < chunks.size(); ++j)
        if (chunks[i].session == chunks[j].session)
          CHECK((chunks[i].end <= chunks[j].start || chunks[j].end <= chunks[i].start));
  }

  TEST_CASE("speaker attributed formatting and prompt") {
    CHECK(FormatSpeakerAttributed(ThreeLines()) ==
          "Speaker 1: Hello.\nSpeaker 2: Hi, how are you?\nSpeaker 1: I'm fine.\n");
    CHECK(FormatSpeakerAttributed(SessionChunk{}) == "");
    SessionChunk single;
    single.utterances = {U("x", 3, 0, "Yes.")};
    CHECK(FormatSpeakerAttributed(single) == "Speaker 3: Yes.\n");
    CHECK(BuildPrompt("") == "\nSummarize the conversation above.\n");
    CHECK(BuildPrompt("Speaker 1: Hello.\n") ==
          "Speaker 1: Hello.\n\nSummarize the conversation above.\n");
    CHECK(BuildPrompt(BuildPrompt("a")) != BuildPrompt("a"));
  }

  TEST_CASE("formatted lines parse back in order") {
    auto parsed = ParseSpeakerLines(BuildPrompt(FormatSpeakerAttributed(ThreeLines())));
    REQUIRE(parsed.size() == 3);
    CHECK(parsed[0] == std::pair<int, std::string>{1, "Hello."});
    CHECK(parsed[1] == std::pair<int, std::string>{2, "Hi, how are you?"});
    CHECK(parsed[2] == std::pair<int, std::string>{1, "I'm fine."});
  }

  TEST_CASE("mock summarizer") {
    MockSummarizer m;
    CHECK(m.Summarize(BuildPrompt(FormatSpeakerAttributed(ThreeLines())), {}) ==
          "Hello. Hi, how are you?");
    CHECK(m.Summarize(BuildPrompt(""), {}) == "");
    CHECK(FirstSentence("No end") == "No end");
    CHECK(FirstSentence("Mr.Smith left. Then") == "Mr.Smith left.");
  }

  TEST_CASE("remote summarizer") {
    MockServer server;
    nlohmann::json last;
    server.On("/summarize", [&](const nlohmann::json &req, httplib::Response &res) {
      last = req;
      MockServer::Reply(res, {{"summary", "SUMMARY"}});
    });
    RemoteSummarizer r(server.url(), 2000ms);
    SummarizerParams p;
    p.temperature = 0.3;
    CHECK(r.Summarize("prompt text", p) == "SUMMARY");
    CHECK(last["prompt"] == "prompt text");
    CHECK(last["temperature"] == 0.3);
    CHECK(last["top_p"] == 1.0);
    CHECK(last["max_tokens"] == 200);

    MockServer broken;
    broken.On("/summarize", [](const nlohmann::json &, httplib::Response &res) {
      MockServer::Reply(res, {{"text", "no summary field"}});
    });
    try {
      RemoteSummarizer(broken.url(), 2000ms).Summarize("x", {});
      FAIL("expected a bad response");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kBadResponse);
    }
    std::string dead = fcm::testing::UnusedUrl();
    try {
      RemoteSummarizer(dead, 1000ms).Summarize("x", {});
      FAIL("expected a network error");
    } catch (const Error &e) {
      CHECK(e.code() == ErrorCode::kNetwork);
      CHECK(std::string(e.what()).find(dead) != std::string::npos);
    }
  }

  TEST_CASE("params validation") {
    CHECK_THROWS_AS(SummarizerParams::FromJson({{"top_p", 0.0}}, {}), Error);
    CHECK_THROWS_AS(SummarizerParams::FromJson({{"seed", 1}}, {}), Error);
    CHECK(SummarizerParams::FromJson({{"max_tokens", 50}}, {}).max_tokens == 50);
  }

  TEST_CASE("pipeline upper bound and determinism") {
    std::vector<Utterance> ref = {U("a", 1, 1, "We will not ship today."),
                                  U("b", 2, 4, "Okay, so we ship tomorrow."),
                                  U("c", 1, 65, "The cat did not eat."),
                                  U("d", 2, 70, "Good.")};
    std::vector<Utterance> bad = ref;
    bad[0].text = "We will ship today.";
    bad[2].text = "";
    MockSummarizer mock;
    LcsScorer lcs;
    SummaryEvaluation truth = EvaluateSummaries(ref, ref, mock, lcs);
    SummaryEvaluation again = EvaluateSummaries(ref, ref, mock, lcs);
    CHECK(truth.summaries == again.summaries);
    CHECK(truth.scores == again.scores);
    SummaryEvaluation corrupted = EvaluateSummaries(ref, bad, mock, lcs);
    REQUIRE(truth.scores.size() == 2);
    for (size_t k = 0; k < truth.scores.size(); ++k) CHECK(truth.scores[k] >= corrupted.scores[k]);
    CHECK(corrupted.mean < truth.mean);
    CHECK_THROWS_AS(EvaluateSummaries({}, {}, mock, lcs), Error);
    std::vector<Utterance> missing = ref;
    missing[1].id = "zzz";
    CHECK_THROWS_AS(EvaluateSummaries(ref, missing, mock, lcs), Error);
  }

  TEST_CASE("utterance jsonl") {
    std::string ok =
        "{\"id\":\"a\",\"session\":\"s\",\"speaker\":1,\"start_s\":0.5,\"text\":\"Hi.\"}\n\n";
    auto u = ParseUtterancesJsonl(ok, "text");
    REQUIRE(u.size() == 1);
    CHECK(u[0].text == "Hi.");
    CHECK_THROWS_AS(ParseUtterancesJsonl(ok, "reference"), Error);
    CHECK_THROWS_AS(ParseUtterancesJsonl(ok + ok, "text"), Error);
    CHECK_THROWS_AS(LoadUtterances("/nonexistent/file.jsonl", "text"), Error);
  }
}
