// src/scorers.cpp

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

#include "scorers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "error.hpp"
#include "http_client.hpp"
#include "text.hpp"

namespace fcm {

using nlohmann::json;

double TokenWeights::Weight(const std::string &token) const {
  auto it = weights.find(token);
  return it == weights.end() ? default_weight : it->second;
}

void TokenWeights::Validate() const {
  Require(default_weight > 0.0, "default token weight must be > 0");
  for (const auto &[tok, w] : weights)
    Require(w > 0.0, "token weight for '" + tok + "' must be > 0");
}

TokenWeights SynthTokenWeights(const SynthConfig &config) {
  TokenWeights tw;
  for (const auto &tok : synth::LexiconVocabulary().tokens()) {
    for (const auto &norm : NormalizeText(tok)) {
      if (synth::IsContent(tok)) tw.weights[norm] = config.content_weight;
      else if (synth::IsFiller(tok)) tw.weights[norm] = config.filler_weight;
    }
  }
  return tw;
}

double ExactMatchScore(const std::string &hyp, const std::string &ref) {
  return hyp == ref ? 1.0 : 0.0;
}

double WeightedTokenF1(const std::string &hyp, const std::string &ref,
                       const TokenWeights &weights) {
  std::vector<std::string> h = NormalizeText(hyp);
  std::vector<std::string> r = NormalizeText(ref);
  if (h.empty() && r.empty()) return 1.0;
  if (h.empty() || r.empty()) return 0.0;
  std::map<std::string, int> hc, rc;
  double h_total = 0, r_total = 0;
  for (const auto &t : h) {
    ++hc[t];
    h_total += weights.Weight(t);
  }
  for (const auto &t : r) {
    ++rc[t];
    r_total += weights.Weight(t);
  }
  double matched = 0;
  for (const auto &[t, n] : hc) {
    auto it = rc.find(t);
    if (it != rc.end()) matched += weights.Weight(t) * std::min(n, it->second);
  }
  double precision = matched / h_total;
  double recall = matched / r_total;
  if (precision + recall <= 0.0) return 0.0;
  return std::clamp(2.0 * precision * recall / (precision + recall), 0.0, 1.0);
}

double LcsRatio(const std::string &hyp, const std::string &ref) {
  std::vector<std::string> a = NormalizeText(hyp);
  std::vector<std::string> b = NormalizeText(ref);
  if (a.empty() && b.empty()) return 1.0;
  std::vector<int> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return 2.0 * prev[b.size()] / static_cast<double>(a.size() + b.size());
}

double RemoteScore(const std::string &endpoint, const std::string &hyp, const std::string &ref,
                   std::chrono::milliseconds timeout) {
  json reply = PostJson(endpoint, "/score", {{"hypothesis", hyp}, {"reference", ref}}, timeout);
  auto it = reply.find("consistency");
  if (it == reply.end() || !it->is_number())
    Fail(ErrorCode::kBadResponse, endpoint + " reply lacks a numeric \"consistency\" field");
  double score = it->get<double>();
  constexpr double kSlack = 1e-9;
  if (!std::isfinite(score) || score < -kSlack || score > 1.0 + kSlack)
    Fail(ErrorCode::kOutOfRange,
         endpoint + " returned consistency " + std::to_string(score) + " outside [0, 1]");
  return std::clamp(score, 0.0, 1.0);
}

WeightedF1Scorer::WeightedF1Scorer(TokenWeights weights) : weights_(std::move(weights)) {
  weights_.Validate();
}

double FunctionScorer::Score(const std::string &h, const std::string &r) const {
  double s = fn_(h, r);
  if (!(s >= 0.0 && s <= 1.0))
    Fail(ErrorCode::kOutOfRange, name_ + " produced score " + std::to_string(s));
  return s;
}

RemoteScorer::RemoteScorer(std::string endpoint, std::chrono::milliseconds timeout,
                           int max_in_flight)
    : endpoint_(std::move(endpoint)), timeout_(timeout), max_in_flight_(max_in_flight) {
  Require(!endpoint_.empty(), "remote scorer needs an endpoint");
  Require(max_in_flight_ >= 1, "max_in_flight must be >= 1");
  Require(timeout_.count() > 0, "timeout must be positive");
}

double RemoteScorer::Score(const std::string &h, const std::string &r) const {
  {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
    ++in_flight_;
  }
  struct Release {
    const RemoteScorer *self;
    ~Release() {
      std::lock_guard<std::mutex> lock(self->mu_);
      --self->in_flight_;
      self->cv_.notify_one();
    }
  } release{this};
  return RemoteScore(endpoint_, h, r, timeout_);
}

std::unique_ptr<ConsistencyScorer> MakeScorer(const json &spec) {
  Require(spec.is_object() && spec.contains("name") && spec["name"].is_string(),
          "scorer spec needs a \"name\"");
  const std::string name = spec["name"].get<std::string>();
  auto allow = [&](std::set<std::string> keys) {
    keys.insert("name");
    for (const auto &[k, v] : spec.items())
      Require(keys.count(k) > 0, "unknown key '" + k + "' for scorer " + name);
  };
  try {
    if (name == "exact_match") {
      allow({});
      return std::make_unique<ExactMatchScorer>();
    }
    if (name == "lcs") {
      allow({});
      return std::make_unique<LcsScorer>();
    }
    if (name == "weighted_f1") {
      allow({"weights", "default_weight", "synth"});
      TokenWeights tw;
      if (spec.contains("synth")) tw = SynthTokenWeights(SynthConfig::FromJson(spec["synth"]));
      if (spec.contains("default_weight")) tw.default_weight = spec["default_weight"].get<double>();
      if (spec.contains("weights"))
        for (const auto &[k, v] : spec["weights"].items()) tw.weights[k] = v.get<double>();
      return std::make_unique<WeightedF1Scorer>(std::move(tw));
    }
    if (name == "remote") {
      allow({"endpoint", "timeout_ms", "max_in_flight"});
      Require(spec.contains("endpoint"), "remote scorer needs an \"endpoint\"");
      return std::make_unique<RemoteScorer>(
          spec["endpoint"].get<std::string>(),
          std::chrono::milliseconds(spec.value("timeout_ms", 10000)),
          spec.value("max_in_flight", 4));
    }
  } catch (const json::exception &e) {
    Fail(ErrorCode::kParse, "scorer spec: " + std::string(e.what()));
  }
  Fail(ErrorCode::kInvalidArgument, "unknown scorer '" + name + "'");
}

}  // namespace fcm
