// src/scorers.hpp

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

#ifndef FCM_SCORERS_HPP_
#define FCM_SCORERS_HPP_

#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>

#include "corpus.hpp"
#include "json.hpp"

namespace fcm {

/// Consistency(hypothesis; reference) in [0, 1].
class ConsistencyScorer {
 public:
  virtual ~ConsistencyScorer() = default;
  virtual double Score(const std::string &hypothesis, const std::string &reference) const = 0;
  virtual std::string name() const = 0;
  // Pure scorers are deterministic and side-effect free.
  virtual bool pure() const = 0;
};

struct TokenWeights {
  std::unordered_map<std::string, double> weights;  // keyed by normalized token
  double default_weight = 1.0;

  double Weight(const std::string &token) const;
  void Validate() const;
  static TokenWeights Uniform() { return {}; }
};

/// Content words heavy, fillers light, as configured for the synthetic corpus.
TokenWeights SynthTokenWeights(const SynthConfig &config);

double ExactMatchScore(const std::string &hyp, const std::string &ref);

/// Weighted bag-of-tokens F1 over normalized tokens with multiset clipping.
/// Both sides empty scores 1; exactly one empty scores 0.
double WeightedTokenF1(const std::string &hyp, const std::string &ref,
                       const TokenWeights &weights);

/// 2 |LCS| / (|hyp| + |ref|) over normalized tokens; both empty scores 1.
double LcsRatio(const std::string &hyp, const std::string &ref);

/// Asks a consistency service: POST <endpoint>/score with
/// {"hypothesis", "reference"}, expects {"consistency": x}. Values up to 1e-9
/// outside [0, 1] are clamped; anything further out is kOutOfRange.
double RemoteScore(const std::string &endpoint, const std::string &hyp, const std::string &ref,
                   std::chrono::milliseconds timeout);

class ExactMatchScorer final : public ConsistencyScorer {
 public:
  double Score(const std::string &h, const std::string &r) const override {
    return ExactMatchScore(h, r);
  }
  std::string name() const override { return "exact_match"; }
  bool pure() const override { return true; }
};

class WeightedF1Scorer final : public ConsistencyScorer {
 public:
  explicit WeightedF1Scorer(TokenWeights weights);
  double Score(const std::string &h, const std::string &r) const override {
    return WeightedTokenF1(h, r, weights_);
  }
  std::string name() const override { return "weighted_f1"; }
  bool pure() const override { return true; }
  const TokenWeights &weights() const { return weights_; }

 private:
  TokenWeights weights_;
};

class LcsScorer final : public ConsistencyScorer {
 public:
  double Score(const std::string &h, const std::string &r) const override {
    return LcsRatio(h, r);
  }
  std::string name() const override { return "lcs"; }
  bool pure() const override { return true; }
};

/// Wraps an arbitrary function; the result is range-checked on every call.
class FunctionScorer final : public ConsistencyScorer {
 public:
  using Fn = std::function<double(const std::string &, const std::string &)>;
  FunctionScorer(std::string name, Fn fn, bool pure = true)
      : name_(std::move(name)), fn_(std::move(fn)), pure_(pure) {}
  double Score(const std::string &h, const std::string &r) const override;
  std::string name() const override { return name_; }
  bool pure() const override { return pure_; }

 private:
  std::string name_;
  Fn fn_;
  bool pure_;
};

class RemoteScorer final : public ConsistencyScorer {
 public:
  RemoteScorer(std::string endpoint, std::chrono::milliseconds timeout, int max_in_flight = 4);
  double Score(const std::string &h, const std::string &r) const override;
  std::string name() const override { return "remote"; }
  bool pure() const override { return false; }
  const std::string &endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
  int max_in_flight_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  mutable int in_flight_ = 0;
};

/// Builds a scorer from a JSON description:
///   {"name": "exact_match"} | {"name": "lcs"} |
///   {"name": "weighted_f1", "weights": {...}, "default_weight": 1.0} |
///   {"name": "weighted_f1", "synth": {<SynthConfig keys>}} |
///   {"name": "remote", "endpoint": "http://...", "timeout_ms": 10000,
///    "max_in_flight": 4}
std::unique_ptr<ConsistencyScorer> MakeScorer(const nlohmann::json &spec);

}  // namespace fcm

#endif  // FCM_SCORERS_HPP_
