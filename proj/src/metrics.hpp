// src/metrics.hpp

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

#ifndef FCM_METRICS_HPP_
#define FCM_METRICS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "scorers.hpp"

namespace fcm {

struct EditBreakdown {
  long substitutions = 0;
  long insertions = 0;
  long deletions = 0;
  long ref_words = 0;

  long errors() const { return substitutions + insertions + deletions; }
  double wer() const { return static_cast<double>(errors()) / static_cast<double>(ref_words); }
  double deletion_rate() const {
    return static_cast<double>(deletions) / static_cast<double>(ref_words);
  }
  EditBreakdown &operator+=(const EditBreakdown &o);
  bool operator==(const EditBreakdown &o) const = default;
};

/// Unit-cost Levenshtein alignment of token sequences. Among alignments of
/// equal cost the one with the fewest substitutions wins, then the fewest
/// deletions. ref_words is |ref| and may be zero here.
EditBreakdown AlignTokens(const std::vector<std::string> &hyp,
                          const std::vector<std::string> &ref);

/// WER on normalized text. Throws if the reference normalizes to nothing.
EditBreakdown WordErrors(const std::string &hyp, const std::string &ref);

using TextPair = std::pair<std::string, std::string>;  // (hypothesis, reference)

/// Pooled counts over all pairs.
EditBreakdown CorpusWer(const std::vector<TextPair> &pairs);

struct ConsistencySummary {
  double mean = 0.0;
  std::vector<double> scores;  // per pair, input order
};

ConsistencySummary AvgConsistency(const std::vector<TextPair> &pairs,
                                  const ConsistencyScorer &scorer);

/// Fraction of scores >= threshold (inclusive).
double ConsistentRatio(const std::vector<double> &scores, double threshold);
double ConsistentRatio(const std::vector<TextPair> &pairs, const ConsistencyScorer &scorer,
                       double threshold);

struct TTestResult {
  double t_statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value_two_tailed = 1.0;
  bool significant_at_95 = false;
};

/// Student's t on d = a - b with an (n - 1) variance denominator.
TTestResult PairedTTest(const std::vector<double> &a, const std::vector<double> &b);

/// Two-tailed tail mass of Student's t with df degrees of freedom.
double StudentTwoTailedP(double t, int df);

// ------------------------------------------------------------------ reports

struct UttMetrics {
  std::string split;
  EditBreakdown errors;
  double avg_consistency = 0.0;
  double consistent_ratio = 0.0;
  size_t n = 0;
};

struct SystemMetrics {
  std::string system;
  std::vector<UttMetrics> splits;
};

/// "metric,value,n" rows, metric named <system>/<split>/<quantity>.
std::string MetricsCsv(const std::vector<SystemMetrics> &systems);

/// One row per system, three columns per split: WER (%), average
/// consistency and consistent ratio.
std::string MetricsMarkdown(const std::vector<SystemMetrics> &systems);

}  // namespace fcm

#endif  // FCM_METRICS_HPP_
