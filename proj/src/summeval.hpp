// src/summeval.hpp

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

#ifndef FCM_SUMMEVAL_HPP_
#define FCM_SUMMEVAL_HPP_

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "scorers.hpp"

namespace fcm {

struct Utterance {
  std::string id;
  std::string session;
  int speaker = 0;
  double start_s = 0.0;
  std::string text;

  bool operator==(const Utterance &) const = default;
};

struct SessionChunk {
  std::string session;
  double start = 0.0;
  double end = 0.0;
  std::vector<Utterance> utterances;  // by (start_s, speaker)
};

struct SummarizerParams {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 200;

  void Validate() const;
  static SummarizerParams FromJson(const nlohmann::json &j, const SummarizerParams &base);
  nlohmann::json ToJson() const;
};

/// Windows [k*w, (k+1)*w) keyed on start time. Empty windows are omitted; a
/// trailing partial window is kept. Utterances must share one session.
std::vector<SessionChunk> ChunkSession(const std::vector<Utterance> &utterances,
                                       double chunk_seconds = 60.0);

/// Groups by session (sessions in first-appearance order) and chunks each.
std::vector<SessionChunk> ChunkAll(const std::vector<Utterance> &utterances,
                                   double chunk_seconds = 60.0);

std::string FormatSpeakerAttributed(const SessionChunk &chunk);

std::string BuildPrompt(const std::string &transcript);

class Summarizer {
 public:
  virtual ~Summarizer() = default;
  virtual std::string Summarize(const std::string &prompt, const SummarizerParams &params) const = 0;
  virtual std::string name() const = 0;
};

/// POST /summarize {"prompt","temperature","top_p","max_tokens"} -> {"summary"}.
class RemoteSummarizer : public Summarizer {
 public:
  RemoteSummarizer(std::string endpoint, std::chrono::milliseconds timeout,
                   int max_in_flight = 4);
  std::string Summarize(const std::string &prompt, const SummarizerParams &params) const override;
  std::string name() const override { return "remote"; }

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
  int max_in_flight_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  mutable int in_flight_ = 0;
};

/// Offline stand-in: the first sentence of each speaker, in ascending
/// speaker order, joined by single spaces. Reads the speaker-attributed
/// lines back out of the prompt.
class MockSummarizer : public Summarizer {
 public:
  std::string Summarize(const std::string &prompt, const SummarizerParams &params) const override;
  std::string name() const override { return "lead-per-speaker"; }
};

/// First sentence: up to and including the first '.', '?' or '!' that ends
/// the text or is followed by a space; the whole text if there is none.
std::string FirstSentence(const std::string &text);

/// Parses "Speaker N: text" lines. Lines not matching the pattern are skipped.
std::vector<std::pair<int, std::string>> ParseSpeakerLines(const std::string &transcript);

struct SummaryEvaluation {
  std::vector<std::string> summaries;  // per chunk
  std::vector<double> scores;          // per chunk
  double mean = 0.0;
};

/// Chunks come from the reference timings; hypothesis utterances are matched
/// to reference utterances by id and placed in the same chunks. Hypothesis
/// transcripts are summarized and each summary is scored against the
/// reference transcript of its chunk.
SummaryEvaluation EvaluateSummaries(const std::vector<Utterance> &reference,
                                    const std::vector<Utterance> &hypothesis,
                                    const Summarizer &summarizer, const ConsistencyScorer &scorer,
                                    const SummarizerParams &params = {},
                                    double chunk_seconds = 60.0);

/// Reads utterances from corpus-style JSONL. `text_field` names the field
/// holding the utterance text ("reference" or "text").
std::vector<Utterance> ParseUtterancesJsonl(const std::string &content,
                                            const std::string &text_field);
std::vector<Utterance> LoadUtterances(const std::string &path, const std::string &text_field);

}  // namespace fcm

#endif  // FCM_SUMMEVAL_HPP_
