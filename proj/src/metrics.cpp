// src/metrics.cpp

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

#include "metrics.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>

#include "error.hpp"
#include "text.hpp"
#include "util.hpp"

namespace fcm {

EditBreakdown &EditBreakdown::operator+=(const EditBreakdown &o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  ref_words += o.ref_words;
  return *this;
}

namespace {

// Ordered by (total, substitutions, deletions); insertions follow from those.
struct Cost {
  long total = 0, subs = 0, dels = 0, ins = 0;
  bool operator<(const Cost &o) const {
    return std::tie(total, subs, dels) < std::tie(o.total, o.subs, o.dels);
  }
};

}  // namespace

EditBreakdown AlignTokens(const std::vector<std::string> &hyp,
                          const std::vector<std::string> &ref) {
  const size_t H = hyp.size(), R = ref.size();
  // cost[i][j]: aligning ref[0..i) with hyp[0..j)
  std::vector<Cost> prev(H + 1), cur(H + 1);
  for (size_t j = 1; j <= H; ++j) prev[j] = {static_cast<long>(j), 0, 0, static_cast<long>(j)};
  for (size_t i = 1; i <= R; ++i) {
    cur[0] = {static_cast<long>(i), 0, static_cast<long>(i), 0};
    for (size_t j = 1; j <= H; ++j) {
      Cost diag = prev[j - 1];
      if (ref[i - 1] != hyp[j - 1]) {
        ++diag.total;
        ++diag.subs;
      }
      Cost del = prev[j];
      ++del.total;
      ++del.dels;
      Cost ins = cur[j - 1];
      ++ins.total;
      ++ins.ins;
      Cost best = diag;
      if (del < best) best = del;
      if (ins < best) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cost &c = prev[H];
  EditBreakdown e;
  e.substitutions = c.subs;
  e.deletions = c.dels;
  e.insertions = c.ins;
  e.ref_words = static_cast<long>(R);
  return e;
}

EditBreakdown WordErrors(const std::string &hyp, const std::string &ref) {
  std::vector<std::string> r = NormalizeText(ref);
  if (r.empty()) Fail(ErrorCode::kInvalidArgument, "reference normalizes to no words");
  return AlignTokens(NormalizeText(hyp), r);
}

EditBreakdown CorpusWer(const std::vector<TextPair> &pairs) {
  if (pairs.empty()) Fail(ErrorCode::kInvalidArgument, "no pairs to score");
  std::vector<EditBreakdown> per(pairs.size());
  ParallelFor(pairs.size(), [&](size_t k) {
    try {
      per[k] = WordErrors(pairs[k].first, pairs[k].second);
    } catch (const Error &e) {
      throw Error(e.code(), "pair " + std::to_string(k) + ": " + e.what());
    }
  });
  EditBreakdown total;
  for (const auto &e : per) total += e;
  return total;
}

ConsistencySummary AvgConsistency(const std::vector<TextPair> &pairs,
                                  const ConsistencyScorer &scorer) {
  if (pairs.empty()) Fail(ErrorCode::kInvalidArgument, "no pairs to score");
  ConsistencySummary out;
  out.scores.assign(pairs.size(), 0.0);
  ParallelFor(pairs.size(), [&](size_t k) {
    try {
      out.scores[k] = scorer.Score(pairs[k].first, pairs[k].second);
    } catch (const Error &e) {
      throw Error(e.code(), "pair " + std::to_string(k) + ": " + e.what());
    }
  });
  double sum = 0;
  for (double s : out.scores) sum += s;
  out.mean = sum / static_cast<double>(pairs.size());
  return out;
}

double ConsistentRatio(const std::vector<double> &scores, double threshold) {
  if (scores.empty()) Fail(ErrorCode::kInvalidArgument, "no scores");
  Require(threshold >= 0.0 && threshold <= 1.0, "threshold must be in [0, 1]");
  size_t hits = 0;
  for (double s : scores) hits += s >= threshold ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

double ConsistentRatio(const std::vector<TextPair> &pairs, const ConsistencyScorer &scorer,
                       double threshold) {
  Require(threshold >= 0.0 && threshold <= 1.0, "threshold must be in [0, 1]");
  return ConsistentRatio(AvgConsistency(pairs, scorer).scores, threshold);
}

double StudentTwoTailedP(double t, int df) {
  Require(df >= 1, "degrees of freedom must be >= 1");
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

TTestResult PairedTTest(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() != b.size())
    Fail(ErrorCode::kInvalidArgument, "paired samples differ in length (" +
                                          std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()) + ")");
  if (a.size() < 2) Fail(ErrorCode::kInvalidArgument, "paired t-test needs n >= 2");
  const size_t n = a.size();
  double mean = 0;
  for (size_t k = 0; k < n; ++k) mean += a[k] - b[k];
  mean /= static_cast<double>(n);
  double ss = 0;
  for (size_t k = 0; k < n; ++k) {
    double d = a[k] - b[k] - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  TTestResult r;
  r.degrees_of_freedom = static_cast<int>(n - 1);
  if (sd == 0.0) {
    if (mean == 0.0) {
      r.t_statistic = 0.0;
    } else {
      r.t_statistic = mean > 0 ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
    }
  } else {
    r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  }
  r.p_value_two_tailed = StudentTwoTailedP(r.t_statistic, r.degrees_of_freedom);
  r.significant_at_95 = r.p_value_two_tailed < 0.05;
  return r;
}

// ------------------------------------------------------------------ reports

namespace {

std::string Fmt(const char *fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

std::string MetricsCsv(const std::vector<SystemMetrics> &systems) {
  std::string out = "metric,value,n\n";
  for (const auto &sys : systems) {
    for (const auto &m : sys.splits) {
      std::string prefix = sys.system + "/" + m.split + "/";
      std::string n = std::to_string(m.n);
      out += prefix + "wer," + Fmt("%.6f", m.errors.wer()) + "," + n + "\n";
      out += prefix + "substitutions," + std::to_string(m.errors.substitutions) + "," + n + "\n";
      out += prefix + "insertions," + std::to_string(m.errors.insertions) + "," + n + "\n";
      out += prefix + "deletions," + std::to_string(m.errors.deletions) + "," + n + "\n";
      out += prefix + "avg_consistency," + Fmt("%.6f", m.avg_consistency) + "," + n + "\n";
      out += prefix + "consistent_ratio," + Fmt("%.6f", m.consistent_ratio) + "," + n + "\n";
    }
  }
  return out;
}

std::string MetricsMarkdown(const std::vector<SystemMetrics> &systems) {
  if (systems.empty()) return "";
  const auto &splits = systems.front().splits;
  std::string head = "| System |", rule = "|---|";
  for (const auto &s : splits) {
    head += " " + s.split + " WER (%) | " + s.split + " Avg. consistency | " + s.split +
            " Consistent ratio |";
    rule += "---:|---:|---:|";
  }
  std::string out = head + "\n" + rule + "\n";
  for (const auto &sys : systems) {
    out += "| " + sys.system + " |";
    for (const auto &m : sys.splits) {
      out += " " + Fmt("%.1f", 100.0 * m.errors.wer()) + " | " + Fmt("%.3f", m.avg_consistency) +
             " | " + Fmt("%.3f", m.consistent_ratio) + " |";
    }
    out += "\n";
  }
  return out;
}

}  // namespace fcm
