// tests/test_metrics.cpp

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

#include <cmath>
#include <random>

#include "doctest.h"
#include "error.hpp"
#include "metrics.hpp"
#include "oracles.hpp"

using namespace fcm;

namespace {

std::vector<std::string> Symbols(const std::vector<int> &v) {
  std::vector<std::string> out;
  for (int x : v) out.push_back(std::string(1, static_cast<char>('a' + x)));
  return out;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("motivating pair") {
    EditBreakdown know = WordErrors("I know.", "I don't know.");
    CHECK(know.deletions == 1);
    CHECK(know.substitutions == 0);
    CHECK(know.insertions == 0);
    CHECK(know.wer() == doctest::Approx(1.0 / 3.0));
    EditBreakdown dunno = WordErrors("I dunno.", "I don't know.");
    CHECK(dunno.substitutions == 1);
    CHECK(dunno.deletions == 1);
    CHECK(dunno.wer() == doctest::Approx(2.0 / 3.0));
    CHECK(WordErrors("I don't know.", "I don't know.").errors() == 0);
    CHECK_THROWS_AS(WordErrors("x", "..."), Error);
  }

  TEST_CASE("alignment matches brute force on short sequences") {
    auto seqs = oracle::AllSequences(3, 4);
    for (const auto &a : seqs)
      for (const auto &b : seqs) {
        EditBreakdown e = AlignTokens(Symbols(a), Symbols(b));
        CHECK(e.errors() == oracle::BruteForceEditDistance(a, b));
        CHECK(e.ref_words == static_cast<long>(b.size()));
        CHECK(static_cast<long>(a.size()) - e.insertions == static_cast<long>(b.size()) - e.deletions);
      }
  }

  TEST_CASE("wer is zero on identity and invariant under normalization") {
    CHECK(WordErrors("Some Words, here.", "some words here").errors() == 0);
    EditBreakdown raw = WordErrors("So, I can't GO now.", "so i cannot go now");
    EditBreakdown norm = WordErrors("so i can't go now", "so i cannot go now");
    CHECK(raw == norm);
  }

  TEST_CASE("pooled corpus wer") {
    CHECK(CorpusWer({{"a b", "a c"}}).wer() == WordErrors("a b", "a c").wer());
    std::vector<TextPair> pairs = {{"a x", "a b"}, {"p q r", "p q r s"}};
    CHECK(CorpusWer(pairs).wer() == doctest::Approx(2.0 / 6.0));
    std::vector<TextPair> twice = pairs;
    twice.insert(twice.end(), pairs.begin(), pairs.end());
    CHECK(CorpusWer(twice).wer() == CorpusWer(pairs).wer());
  }

  TEST_CASE("average consistency and consistent ratio") {
    LcsScorer lcs;
    CHECK(AvgConsistency({{"a b", "a b"}, {"c", "c"}}, lcs).mean == 1.0);
    FunctionScorer table("table", [](const std::string &h, const std::string &) {
      return h == "x" ? 0.2 : 0.9;
    });
    CHECK(AvgConsistency({{"x", "r"}, {"y", "r"}}, table).mean == doctest::Approx(0.55));
    std::mt19937 eng(1);
    std::vector<TextPair> pairs;
    for (int k = 0; k < 100; ++k)
      pairs.push_back({std::string(1 + eng() % 5, 'a') + " b", std::string(1 + eng() % 5, 'a')});
    ConsistencySummary s = AvgConsistency(pairs, lcs);
    double sum = 0;
    for (const auto &[h, r] : pairs) sum += lcs.Score(h, r);
    CHECK(std::abs(s.mean - sum / 100) <= 1e-12);
    CHECK(ConsistentRatio({0.4, 0.6, 0.9}, 0.5) == doctest::Approx(2.0 / 3.0));
    CHECK(ConsistentRatio({0.4, 0.6, 0.9}, 0.0) == 1.0);
    CHECK(ConsistentRatio({1.0, 0.99}, 1.0) < 1.0);
    CHECK(ConsistentRatio({0.5}, 0.5) == 1.0);
  }

  TEST_CASE("paired t-test") {
    TTestResult same = PairedTTest({1, 2, 3}, {1, 2, 3});
    CHECK(same.t_statistic == 0.0);
    CHECK(same.p_value_two_tailed == 1.0);
    CHECK_FALSE(same.significant_at_95);
    TTestResult r = PairedTTest({2, 4, 6}, {1, 2, 3});
    CHECK(r.t_statistic == doctest::Approx(2.0 * std::sqrt(3.0)));
    CHECK(r.degrees_of_freedom == 2);
    CHECK(r.p_value_two_tailed == doctest::Approx(oracle::SimpsonTwoTailedP(r.t_statistic, 2)).epsilon(1e-6));
    CHECK(std::abs(r.p_value_two_tailed - 0.0742) <= 5e-4);
    CHECK(std::abs(StudentTwoTailedP(2.262, 9) - 0.05) <= 5e-4);
    CHECK_THROWS_AS(PairedTTest({1}, {2}), Error);
    CHECK_THROWS_AS(PairedTTest({1, 2}, {2}), Error);
  }

  TEST_CASE("t-test antisymmetry and monotonicity") {
    std::mt19937_64 eng(8);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
      size_t len = 2 + eng() % 20;
      std::vector<double> a(len), b(len);
      for (size_t k = 0; k < len; ++k) {
        a[k] = n(eng);
        b[k] = n(eng) + 0.3;
      }
      TTestResult ab = PairedTTest(a, b), ba = PairedTTest(b, a);
      CHECK(ab.t_statistic == -ba.t_statistic);
      CHECK(ab.p_value_two_tailed == ba.p_value_two_tailed);
    }
    for (int df : {1, 2, 5, 9, 30, 199}) {
      double prev = 1.0;
      for (double t = 0.25; t < 8; t += 0.25) {
        double p = StudentTwoTailedP(t, df);
        CHECK(p < prev);
        CHECK(std::abs(p - oracle::SimpsonTwoTailedP(t, df)) <= 1e-6);
        prev = p;
      }
    }
  }

  TEST_CASE("reports") {
    UttMetrics m;
    m.split = "test";
    m.errors = {1, 0, 1, 10};
    m.avg_consistency = 0.75;
    m.consistent_ratio = 0.5;
    m.n = 4;
    std::vector<SystemMetrics> sys = {{"ce", {m}}};
    std::string csv = MetricsCsv(sys);
    CHECK(csv.find("metric,value,n") == 0);
    CHECK(csv.find("ce/test/wer,0.2") != std::string::npos);
    std::string md = MetricsMarkdown(sys);
    CHECK(md.find("| ce | 20.0 | 0.750 | 0.500 |") != std::string::npos);
  }
}
