// tests/test_objective.cpp

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
#include <numeric>
#include <random>

#include "doctest.h"
#include "error.hpp"
#include "objective.hpp"
#include "oracles.hpp"

using namespace fcm;

namespace {

std::vector<Hypothesis> DummyHyps(size_t n) {
  std::vector<Hypothesis> h(n);
  for (size_t k = 0; k < n; ++k) h[k].tokens = {static_cast<int>(2 + k)};
  return h;
}

ScoredNBest FromLogProbs(const std::vector<double> &lp, const std::vector<double> &s, int words) {
  auto hyps = DummyHyps(lp.size());
  for (size_t k = 0; k < lp.size(); ++k) hyps[k].log_prob = lp[k];
  return AssembleScoredNBest(hyps, std::vector<std::string>(lp.size()), s, words);
}

}  // namespace

TEST_SUITE("objective") {
  TEST_CASE("posterior normalization") {
    CHECK(NormalizePosteriors({-3.0}) == std::vector<double>{1.0});
    auto two = NormalizePosteriors({-1.0, -1.0});
    CHECK(two[0] == 0.5);
    CHECK(two[1] == 0.5);
    auto fig = NormalizePosteriors({std::log(0.8), std::log(0.2)});
    CHECK(fig[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(fig[1] == doctest::Approx(0.2).epsilon(1e-12));
    auto far = NormalizePosteriors({-1000.0, -1001.0});
    CHECK(std::isfinite(far[0]));
    CHECK(far[0] + far[1] == doctest::Approx(1.0));
  }

  TEST_CASE("expected consistency") {
    ScoredNBest one = FromLogProbs({-2.0, -5.0, -3.0}, {1.0, 1.0, 1.0}, 4);
    CHECK(one.expected == doctest::Approx(4.0).epsilon(1e-12));
    ScoredNBest single = FromLogProbs({-2.0}, {0.3}, 5);
    CHECK(single.expected == doctest::Approx(1.5));
    ScoredNBest fig = FromLogProbs({std::log(0.8), std::log(0.2)}, {0.2, 0.9}, 3);
    CHECK(fig.expected == doctest::Approx(1.02).epsilon(1e-12));
    auto g = FcmCoefficients(fig);
    CHECK(g[0] == doctest::Approx(-0.336).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(0.336).epsilon(1e-12));
  }

  TEST_CASE("coefficient structure on random lists") {
    std::mt19937_64 eng(99);
    std::uniform_real_distribution<double> u(0, 1), lp(-20, 0);
    for (int trial = 0; trial < 1000; ++trial) {
      size_t n = 1 + eng() % 6;
      std::vector<double> l(n), s(n);
      for (size_t k = 0; k < n; ++k) {
        l[k] = lp(eng);
        s[k] = u(eng);
      }
      int words = 1 + static_cast<int>(eng() % 12);
      ScoredNBest sc = FromLogProbs(l, s, words);
      auto g = FcmCoefficients(sc);
      CHECK(std::abs(std::accumulate(g.begin(), g.end(), 0.0)) <= 1e-9);
      for (size_t k = 0; k < n; ++k) {
        double diff = sc.hypotheses[k].scaled - sc.expected;
        if (diff > 1e-12) CHECK(g[k] > 0);
        if (diff < -1e-12) CHECK(g[k] < 0);
      }
      if (n == 1) CHECK(g[0] == 0.0);
      // Power-of-two factors scale every product exactly; others up to rounding.
      for (double c : {0.5, 0.25, 0.7}) {
        std::vector<double> s2 = s;
        for (double &x : s2) x *= c;
        ScoredNBest scaled = FromLogProbs(l, s2, words);
        auto g2 = FcmCoefficients(scaled);
        double tol = c == 0.7 ? 1e-12 : 0.0;
        CHECK(std::abs(scaled.expected - c * sc.expected) <= tol * std::abs(sc.expected));
        for (size_t k = 0; k < n; ++k) CHECK(std::abs(g2[k] - c * g[k]) <= tol * sc.expected);
      }
    }
  }

  TEST_CASE("step gradients cover every emitted token") {
    std::vector<Hypothesis> hyps = {{{3, 4}, -1.0, false}, {{5, 5, 5}, -2.0, true}};
    ScoredNBest sc = AssembleScoredNBest(hyps, {"a", "b"}, {0.5, 1.0}, 2);
    auto grads = FcmStepGradients(sc);
    auto g = FcmCoefficients(sc);
    REQUIRE(grads.size() == 2);
    REQUIRE(grads[0].cells.size() == 3);
    CHECK(grads[0].cells[2].token == Vocabulary::kEos);
    REQUIRE(grads[1].cells.size() == 3);
    for (const auto &c : grads[0].cells) CHECK(c.value == g[0]);
    for (size_t n = 0; n < 3; ++n) {
      CHECK(grads[1].cells[n].step == static_cast<int>(n));
      CHECK(grads[1].cells[n].token == 5);
    }
  }

  TEST_CASE("exact match on an exact two-list favours the correct hypothesis") {
    std::vector<Hypothesis> hyps = {{{3}, -0.5, false}, {{4}, -1.5, false}};
    ExactMatchScorer em;
    ScoredNBest sc = AssembleScoredNBest(hyps, {"wrong", "right"},
                                         {em.Score("wrong", "right"), em.Score("right", "right")}, 1);
    auto g = FcmCoefficients(sc);
    CHECK(g[1] > 0);
    CHECK(g[0] < 0);
  }

  TEST_CASE("semi end-to-end gradient with a frozen list") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
      ModelParams p = oracle::RandomParams(4, 3, 6, 300 + seed, 1.0);
      std::vector<int> input = {2, 0, 1};
      NBestList nb = BeamDecode(p, input, 4, 5);
      std::vector<double> s;
      for (size_t k = 0; k < nb.hypotheses.size(); ++k) s.push_back(0.1 + 0.2 * k);
      ScoredNBest sc = AssembleScoredNBest(nb.hypotheses,
                                           std::vector<std::string>(nb.hypotheses.size()), s, 4);
      std::vector<double> scaled;
      for (const auto &h : sc.hypotheses) scaled.push_back(h.scaled);
      auto check = oracle::CompareWithCentralDifferences(
          p, FcmGradientForScored(p, input, sc), [&](const ModelParams &q) {
            return oracle::ExpectedScaledScore(q, input, nb.hypotheses, scaled);
          });
      CHECK(check.max_rel_error <= 1e-3);
    }
  }

  TEST_CASE("corpus objective is additive") {
    SynthConfig cfg = SynthConfig::Defaults();
    cfg.n_samples = 4;
    Corpus c = GenerateSyntheticCorpus(cfg);
    ModelParams p = InitParams(4, c.source_vocab_size, c.vocab.size(), 3);
    DecodeSettings ds;
    ds.beam_size = 3;
    ds.nbest_size = 3;
    LcsScorer lcs;
    Corpus empty = c.Slice(0, 0);
    CHECK(FcmCorpusObjective(empty, p, c.vocab, lcs, ds) == 0.0);
    double total = FcmCorpusObjective(c, p, c.vocab, lcs, ds);
    double parts = 0;
    for (size_t r = 0; r < c.size(); ++r)
      parts += FcmCorpusObjective(c.Slice(r, r + 1), p, c.vocab, lcs, ds);
    CHECK(total == doctest::Approx(parts).epsilon(1e-12));
    FunctionScorer one("one", [](const std::string &, const std::string &) { return 1.0; });
    CHECK(FcmCorpusObjective(c.Slice(0, 1), p, c.vocab, one, ds) ==
          doctest::Approx(c.samples[0].ref_word_count));
  }

  TEST_CASE("a single effective hypothesis gives a zero gradient") {
    SynthConfig cfg = SynthConfig::Defaults();
    cfg.n_samples = 1;
    Corpus c = GenerateSyntheticCorpus(cfg);
    ModelParams p = InitParams(4, c.source_vocab_size, c.vocab.size(), 3);
    DecodeSettings ds;
    ds.beam_size = 1;
    ds.nbest_size = 1;
    ExactMatchScorer em;
    SampleGradient sg = FcmSampleGradient(p, c.vocab, c.samples[0], em, ds);
    double m = 0;
    sg.gradients.ForEach([&](const char *, const Matrix &x) { m = std::max(m, x.cwiseAbs().maxCoeff()); });
    CHECK(m == 0.0);
  }

  TEST_CASE("decode settings") {
    DecodeSettings ds;
    CHECK(ds.ForInput(5).max_len == 13);
    ds.max_len = 3;
    CHECK(ds.ForInput(5).max_len == 3);
    ds.nbest_size = 9;
    ModelParams p = ModelParams::Zeros(2, 2, 4);
    CHECK_THROWS_AS(DecodeNBest(p, {0}, ds), Error);
  }
}
