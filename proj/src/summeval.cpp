// src/summeval.cpp

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

#include "summeval.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <regex>
#include <set>
#include <unordered_map>

#include "error.hpp"
#include "http_client.hpp"
#include "util.hpp"

namespace fcm {

using nlohmann::json;

void SummarizerParams::Validate() const {
  Require(temperature >= 0.0, "temperature must be >= 0");
  Require(top_p > 0.0 && top_p <= 1.0, "top_p must be in (0, 1]");
  Require(max_tokens >= 1, "max_tokens must be >= 1");
}

SummarizerParams SummarizerParams::FromJson(const json &j, const SummarizerParams &base) {
  Require(j.is_object(), "summarizer params must be a JSON object");
  for (const auto &[k, v] : j.items())
    Require(k == "temperature" || k == "top_p" || k == "max_tokens",
            "unknown summarizer key '" + k + "'");
  SummarizerParams p = base;
  try {
    if (j.contains("temperature")) p.temperature = j["temperature"].get<double>();
    if (j.contains("top_p")) p.top_p = j["top_p"].get<double>();
    if (j.contains("max_tokens")) p.max_tokens = j["max_tokens"].get<int>();
  } catch (const json::exception &e) {
    Fail(ErrorCode::kParse, std::string("summarizer params: ") + e.what());
  }
  p.Validate();
  return p;
}

json SummarizerParams::ToJson() const {
  return {{"temperature", temperature}, {"top_p", top_p}, {"max_tokens", max_tokens}};
}

std::vector<SessionChunk> ChunkSession(const std::vector<Utterance> &utterances,
                                       double chunk_seconds) {
  Require(chunk_seconds > 0.0, "chunk_seconds must be > 0");
  std::map<long, SessionChunk> windows;
  for (const auto &u : utterances) {
    Require(u.start_s >= 0.0, "utterance " + u.id + " starts before 0");
    Require(u.session == utterances.front().session, "utterances span several sessions");
    long k = static_cast<long>(std::floor(u.start_s / chunk_seconds));
    SessionChunk &c = windows[k];
    c.session = u.session;
    c.start = static_cast<double>(k) * chunk_seconds;
    c.end = static_cast<double>(k + 1) * chunk_seconds;
    c.utterances.push_back(u);
  }
  std::vector<SessionChunk> out;
  for (auto &[k, c] : windows) {
    std::stable_sort(c.utterances.begin(), c.utterances.end(),
                     [](const Utterance &a, const Utterance &b) {
                       if (a.start_s != b.start_s) return a.start_s < b.start_s;
                       return a.speaker < b.speaker;
                     });
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<SessionChunk> ChunkAll(const std::vector<Utterance> &utterances,
                                   double chunk_seconds) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Utterance>> by_session;
  for (const auto &u : utterances) {
    auto [it, fresh] = by_session.try_emplace(u.session);
    if (fresh) order.push_back(u.session);
    it->second.push_back(u);
  }
  std::vector<SessionChunk> out;
  for (const auto &s : order)
    for (auto &c : ChunkSession(by_session[s], chunk_seconds)) out.push_back(std::move(c));
  return out;
}

std::string FormatSpeakerAttributed(const SessionChunk &chunk) {
  std::string out;
  for (const auto &u : chunk.utterances)
    out += "Speaker " + std::to_string(u.speaker) + ": " + u.text + "\n";
  return out;
}

std::string BuildPrompt(const std::string &transcript) {
  return transcript + "\nSummarize the conversation above.\n";
}

// ------------------------------------------------------------- summarizers

RemoteSummarizer::RemoteSummarizer(std::string endpoint, std::chrono::milliseconds timeout,
                                   int max_in_flight)
    : endpoint_(std::move(endpoint)), timeout_(timeout), max_in_flight_(max_in_flight) {
  Require(!endpoint_.empty(), "remote summarizer needs an endpoint");
  Require(max_in_flight_ >= 1, "max_in_flight must be >= 1");
  Require(timeout_.count() > 0, "timeout must be positive");
}

std::string RemoteSummarizer::Summarize(const std::string &prompt,
                                        const SummarizerParams &params) const {
  params.Validate();
  {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
    ++in_flight_;
  }
  struct Release {
    const RemoteSummarizer *self;
    ~Release() {
      std::lock_guard<std::mutex> lock(self->mu_);
      --self->in_flight_;
      self->cv_.notify_one();
    }
  } release{this};
  json body = {{"prompt", prompt},
               {"temperature", params.temperature},
               {"top_p", params.top_p},
               {"max_tokens", params.max_tokens}};
  json reply = PostJson(endpoint_, "/summarize", body, timeout_);
  auto it = reply.find("summary");
  if (it == reply.end() || !it->is_string())
    Fail(ErrorCode::kBadResponse, "summarizer " + endpoint_ + ": reply lacks a string \"summary\"");
  return it->get<std::string>();
}

std::string FirstSentence(const std::string &text) {
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if ((c == '.' || c == '?' || c == '!') && (i + 1 == text.size() || text[i + 1] == ' '))
      return text.substr(0, i + 1);
  }
  return text;
}

std::vector<std::pair<int, std::string>> ParseSpeakerLines(const std::string &transcript) {
  static const std::regex kLine(R"(^Speaker (\d+): (.*)$)");
  std::vector<std::pair<int, std::string>> out;
  size_t pos = 0;
  while (pos < transcript.size()) {
    size_t nl = transcript.find('\n', pos);
    if (nl == std::string::npos) nl = transcript.size();
    std::string line = transcript.substr(pos, nl - pos);
    pos = nl + 1;
    std::smatch m;
    if (std::regex_match(line, m, kLine)) out.emplace_back(std::stoi(m[1].str()), m[2].str());
  }
  return out;
}

std::string MockSummarizer::Summarize(const std::string &prompt,
                                      const SummarizerParams &params) const {
  params.Validate();
  std::map<int, std::string> lead;
  for (const auto &[speaker, text] : ParseSpeakerLines(prompt)) {
    if (lead.count(speaker) || text.empty()) continue;
    lead[speaker] = FirstSentence(text);
  }
  std::string out;
  for (const auto &[speaker, sentence] : lead) {
    if (!out.empty()) out += " ";
    out += sentence;
  }
  return out;
}

// -------------------------------------------------------------- evaluation

SummaryEvaluation EvaluateSummaries(const std::vector<Utterance> &reference,
                                    const std::vector<Utterance> &hypothesis,
                                    const Summarizer &summarizer, const ConsistencyScorer &scorer,
                                    const SummarizerParams &params, double chunk_seconds) {
  params.Validate();
  std::vector<SessionChunk> chunks = ChunkAll(reference, chunk_seconds);
  if (chunks.empty()) Fail(ErrorCode::kInvalidArgument, "no chunks to evaluate");

  std::unordered_map<std::string, const Utterance *> hyp_by_id;
  for (const auto &u : hypothesis)
    if (!hyp_by_id.emplace(u.id, &u).second)
      Fail(ErrorCode::kInvalidArgument, "duplicate hypothesis utterance " + u.id);
  if (hypothesis.size() != reference.size())
    Fail(ErrorCode::kInvalidArgument,
         "hypothesis side has " + std::to_string(hypothesis.size()) +
             " utterances, reference side " + std::to_string(reference.size()) +
             "; chunks would not match");

  // Hypothesis chunks reuse the reference windows and ordering.
  std::vector<SessionChunk> hyp_chunks;
  for (const auto &c : chunks) {
    SessionChunk h = c;
    h.utterances.clear();
    for (const auto &u : c.utterances) {
      auto it = hyp_by_id.find(u.id);
      if (it == hyp_by_id.end())
        Fail(ErrorCode::kInvalidArgument, "utterance " + u.id + " has no hypothesis; chunks differ");
      // Empty output contributes no line; the chunk is still summarized.
      if (it->second->text.empty()) continue;
      Utterance hu = u;
      hu.text = it->second->text;
      h.utterances.push_back(std::move(hu));
    }
    hyp_chunks.push_back(std::move(h));
  }

  SummaryEvaluation ev;
  ev.summaries.assign(chunks.size(), "");
  ev.scores.assign(chunks.size(), 0.0);
  ParallelFor(chunks.size(), [&](size_t k) {
    try {
      std::string summary =
          summarizer.Summarize(BuildPrompt(FormatSpeakerAttributed(hyp_chunks[k])), params);
      ev.scores[k] = scorer.Score(summary, FormatSpeakerAttributed(chunks[k]));
      ev.summaries[k] = std::move(summary);
    } catch (const Error &e) {
      throw Error(e.code(), "chunk " + std::to_string(k) + " (" + chunks[k].session + " @" +
                                std::to_string(static_cast<long>(chunks[k].start)) +
                                "s): " + e.what());
    }
  });
  double sum = 0;
  for (double s : ev.scores) sum += s;
  ev.mean = sum / static_cast<double>(ev.scores.size());
  return ev;
}

std::vector<Utterance> ParseUtterancesJsonl(const std::string &content,
                                            const std::string &text_field) {
  std::vector<Utterance> out;
  std::set<std::string> seen;
  size_t pos = 0;
  int line_no = 0;
  while (pos < content.size()) {
    size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string where = "line " + std::to_string(line_no);
    try {
      json obj = json::parse(line);
      if (!obj.is_object()) Fail(ErrorCode::kParse, where + ": expected a JSON object");
      for (const char *key : {"id", "session", "speaker", "start_s"})
        if (!obj.contains(key)) Fail(ErrorCode::kParse, where + ": missing field \"" + key + "\"");
      if (!obj.contains(text_field))
        Fail(ErrorCode::kParse, where + ": missing field \"" + text_field + "\"");
      Utterance u;
      u.id = obj["id"].get<std::string>();
      u.session = obj["session"].get<std::string>();
      u.speaker = obj["speaker"].get<int>();
      u.start_s = obj["start_s"].get<double>();
      u.text = obj[text_field].get<std::string>();
      if (u.start_s < 0) Fail(ErrorCode::kParse, where + ": \"start_s\" is negative");
      if (!seen.insert(u.id).second)
        Fail(ErrorCode::kParse, where + ": duplicate id \"" + u.id + "\"");
      out.push_back(std::move(u));
    } catch (const json::exception &e) {
      Fail(ErrorCode::kParse, where + ": " + e.what());
    }
  }
  return out;
}

std::vector<Utterance> LoadUtterances(const std::string &path, const std::string &text_field) {
  if (!std::filesystem::exists(path)) Fail(ErrorCode::kIo, "utterance file not found: " + path);
  try {
    return ParseUtterancesJsonl(ReadFile(path), text_field);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace fcm
