// tests/test_beam.cpp

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

#include "beam.hpp"
#include "doctest.h"
#include "error.hpp"
#include "objective.hpp"
#include "oracles.hpp"

using namespace fcm;

namespace {

// Greedy decoding written out step by step.
std::vector<int> Greedy(const ModelParams &p, const std::vector<int> &input, int max_len,
                        bool *truncated) {
  DecodeState st = StartDecode(p, input);
  std::vector<int> out;
  int prev = Vocabulary::kBos;
  for (int n = 0; n < max_len; ++n) {
    StepOutput o = ForwardStep(p, st, prev);
    int best = -1;
    for (int i = 0; i < p.target_vocab_size(); ++i)
      if (i != Vocabulary::kBos && (best < 0 || o.log_probs[i] > o.log_probs[best])) best = i;
    if (best == Vocabulary::kEos) {
      *truncated = false;
      return out;
    }
    out.push_back(best);
    prev = best;
    st = o.next;
  }
  *truncated = true;
  return out;
}

}  // namespace

TEST_SUITE("beam") {
  TEST_CASE("beam of one is greedy") {
    for (uint64_t seed = 0; seed < 30; ++seed) {
      ModelParams p = oracle::RandomParams(4, 3, 6, seed, 1.5);
      bool trunc = false;
      auto greedy = Greedy(p, {1, 2}, 6, &trunc);
      NBestList nb = BeamDecode(p, {1, 2}, 1, 6);
      REQUIRE(nb.hypotheses.size() == 1);
      CHECK(nb.hypotheses[0].tokens == greedy);
      CHECK(nb.hypotheses[0].truncated == trunc);
    }
  }

  TEST_CASE("exhaustive width equals enumeration") {
    for (int V = 3; V <= 4; ++V)
      for (int L = 1; L <= 4; ++L)
        for (uint64_t seed = 0; seed < 5; ++seed) {
          ModelParams p = oracle::RandomParams(3, 2, V, 1000 * V + 10 * L + seed, 1.5);
          auto all = oracle::EnumerateAll(p, {1, 0}, L);
          NBestList nb = BeamDecode(p, {1, 0}, static_cast<int>(std::pow(V, L)), L);
          REQUIRE(nb.hypotheses.size() == all.size());
          for (size_t k = 0; k < all.size(); ++k) {
            CHECK(nb.hypotheses[k].tokens == all[k].tokens);
            CHECK(nb.hypotheses[k].truncated == all[k].truncated);
            CHECK(std::abs(nb.hypotheses[k].log_prob - all[k].log_prob) <= 1e-10);
          }
        }
  }

  TEST_CASE("returned scores equal rescoring and the best is monotone in width") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      ModelParams p = oracle::RandomParams(5, 4, 7, 50 + seed, 1.2);
      std::vector<int> input = {3, 1, 2};
      double best = -INFINITY;
      for (int B = 1; B <= 6; ++B) {
        NBestList nb = BeamDecode(p, input, B, 7);
        for (const auto &h : nb.hypotheses) {
          CHECK(std::abs(h.log_prob - SequenceLogProb(p, input, h)) <= 1e-10);
          CHECK(std::abs(h.log_prob - oracle::ManualSequenceLogProb(p, input, h)) <= 1e-10);
        }
        CHECK(nb.hypotheses.front().log_prob >= best - 1e-12);
        best = nb.hypotheses.front().log_prob;
      }
    }
  }

  TEST_CASE("uniform model scores") {
    ModelParams p = ModelParams::Zeros(2, 2, 5);
    for (int k = 0; k < 4; ++k) {
      std::vector<int> toks(k, 3);
      CHECK(SequenceLogProb(p, {0}, toks) == doctest::Approx((k + 1) * -std::log(5.0)));
    }
  }

  TEST_CASE("two hypothesis fixture ranks 0.8 over 0.2") {
    auto fx = oracle::MakeTwoHypothesisFixture();
    NBestList nb = BeamDecode(fx.model.params, {0}, 4, 8);
    REQUIRE(nb.hypotheses.size() >= 2);
    CHECK(fx.model.vocab.Render(nb.hypotheses[0].tokens) == "I know.");
    CHECK(fx.model.vocab.Render(nb.hypotheses[1].tokens) == "I dunno.");
    auto post = NormalizePosteriors({nb.hypotheses[0].log_prob, nb.hypotheses[1].log_prob});
    CHECK(post[0] == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(post[1] == doctest::Approx(0.2).epsilon(1e-9));
  }

  TEST_CASE("argument checks") {
    ModelParams p = ModelParams::Zeros(2, 2, 4);
    CHECK_THROWS_AS(BeamDecode(p, {0}, 0, 3), Error);
    CHECK_THROWS_AS(BeamDecode(p, {0}, 2, 0), Error);
    CHECK_THROWS_AS(SequenceLogProb(p, {0}, {9}), Error);
  }
}
