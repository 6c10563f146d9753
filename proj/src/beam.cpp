// src/beam.cpp

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

#include "beam.hpp"

#include <algorithm>

#include "error.hpp"

namespace fcm {

std::vector<int> Hypothesis::Conditioning() const {
  std::vector<int> cond{Vocabulary::kBos};
  cond.insert(cond.end(), tokens.begin(), tokens.end());
  if (truncated) cond.pop_back();
  return cond;
}

std::vector<int> Hypothesis::Predicted() const {
  std::vector<int> pred = tokens;
  if (!truncated) pred.push_back(Vocabulary::kEos);
  return pred;
}

namespace {

struct Live {
  std::vector<int> tokens;
  double log_prob = 0.0;
  DecodeState state;
};

struct Candidate {
  size_t parent = 0;
  int token = 0;
  double log_prob = 0.0;
  double rank = 0.0;
};

// Compares the full candidate sequences, EOS included.
bool LexLess(const std::vector<int> &a_prefix, int a_tok, const std::vector<int> &b_prefix,
             int b_tok) {
  std::vector<int> a = a_prefix, b = b_prefix;
  a.push_back(a_tok);
  b.push_back(b_tok);
  return a < b;
}

double RankScore(double log_prob, size_t steps, bool normalize) {
  return normalize ? log_prob / static_cast<double>(std::max<size_t>(1, steps)) : log_prob;
}

}  // namespace

NBestList BeamDecode(const ModelParams &params, const std::vector<int> &input,
                     const BeamOptions &options) {
  Require(options.beam_size >= 1, "beam_size must be >= 1");
  Require(options.max_len >= 1, "max_len must be >= 1");
  const int V = params.target_vocab_size();
  const size_t B = static_cast<size_t>(options.beam_size);

  std::vector<Live> live(1);
  live[0].state = StartDecode(params, input);
  std::vector<Hypothesis> done;

  for (int step = 0; step < options.max_len && !live.empty(); ++step) {
    std::vector<Candidate> cands;
    std::vector<DecodeState> next_states(live.size());
    cands.reserve(live.size() * V);
    for (size_t h = 0; h < live.size(); ++h) {
      int prev = live[h].tokens.empty() ? Vocabulary::kBos : live[h].tokens.back();
      StepOutput out = ForwardStep(params, live[h].state, prev);
      next_states[h] = std::move(out.next);
      for (int tok = 0; tok < V; ++tok) {
        if (tok == Vocabulary::kBos) continue;
        double lp = live[h].log_prob + out.log_probs[tok];
        cands.push_back({h, tok, lp, RankScore(lp, live[h].tokens.size() + 1,
                                               options.length_normalize)});
      }
    }
    size_t keep = B - done.size();
    auto better = [&](const Candidate &a, const Candidate &b) {
      if (a.rank != b.rank) return a.rank > b.rank;
      return LexLess(live[a.parent].tokens, a.token, live[b.parent].tokens, b.token);
    };
    keep = std::min(keep, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(), better);

    std::vector<Live> next;
    for (size_t k = 0; k < keep; ++k) {
      const Candidate &c = cands[k];
      if (c.token == Vocabulary::kEos) {
        done.push_back({live[c.parent].tokens, c.log_prob, false});
      } else {
        Live l;
        l.tokens = live[c.parent].tokens;
        l.tokens.push_back(c.token);
        l.log_prob = c.log_prob;
        l.state = next_states[c.parent];
        next.push_back(std::move(l));
      }
    }
    live = std::move(next);
  }
  for (auto &l : live) done.push_back({std::move(l.tokens), l.log_prob, true});

  auto steps = [](const Hypothesis &h) { return h.tokens.size() + (h.truncated ? 0 : 1); };
  std::sort(done.begin(), done.end(), [&](const Hypothesis &a, const Hypothesis &b) {
    double ra = RankScore(a.log_prob, steps(a), options.length_normalize);
    double rb = RankScore(b.log_prob, steps(b), options.length_normalize);
    if (ra != rb) return ra > rb;
    return a.Predicted() < b.Predicted();
  });
  if (done.size() > B) done.resize(B);
  return {std::move(done), options.beam_size};
}

NBestList BeamDecode(const ModelParams &params, const std::vector<int> &input, int beam_size,
                     int max_len) {
  BeamOptions opts;
  opts.beam_size = beam_size;
  opts.max_len = max_len;
  return BeamDecode(params, input, opts);
}

double SequenceLogProb(const ModelParams &params, const std::vector<int> &input,
                       const std::vector<int> &tokens, bool include_eos) {
  Hypothesis h{tokens, 0.0, !include_eos};
  Require(include_eos || !tokens.empty(), "a truncated sequence needs at least one token");
  return SequenceLogProb(params, input, h);
}

double SequenceLogProb(const ModelParams &params, const std::vector<int> &input,
                       const Hypothesis &hyp) {
  std::vector<int> pred = hyp.Predicted();
  for (int t : pred)
    if (t < 0 || t >= params.target_vocab_size())
      Fail(ErrorCode::kOutOfRange, "token index " + std::to_string(t) + " out of range");
  ForwardTrace trace = ForwardTeacher(params, input, hyp.Conditioning());
  double total = 0.0;
  for (size_t n = 0; n < pred.size(); ++n) total += trace.log_probs(n, pred[n]);
  return total;
}

}  // namespace fcm
