// src/objective.cpp

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

#include "objective.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "util.hpp"

namespace fcm {

void ScoredNBest::Validate() const {
  double total = 0, expect = 0;
  for (const auto &h : hypotheses) {
    if (!(h.posterior > 0.0 && h.posterior <= 1.0))
      Fail(ErrorCode::kNumeric, "normalized posterior outside (0, 1]");
    total += h.posterior;
    expect += h.posterior * h.scaled;
  }
  if (std::abs(total - 1.0) > 1e-9) Fail(ErrorCode::kNumeric, "posteriors do not sum to 1");
  if (std::abs(expect - expected) > 1e-9)
    Fail(ErrorCode::kNumeric, "expected consistency disagrees with its terms");
  if (expected < -1e-9 || expected > ref_word_count + 1e-9)
    Fail(ErrorCode::kNumeric, "expected consistency outside [0, |Y_r|]");
}

std::vector<double> NormalizePosteriors(const std::vector<double> &log_probs) {
  if (log_probs.empty()) Fail(ErrorCode::kInvalidArgument, "cannot normalize an empty list");
  for (double lp : log_probs)
    if (std::isnan(lp)) Fail(ErrorCode::kNumeric, "NaN log-probability");
  double m = *std::max_element(log_probs.begin(), log_probs.end());
  if (!std::isfinite(m)) Fail(ErrorCode::kNumeric, "no finite log-probability to normalize");
  std::vector<double> out(log_probs.size());
  double z = 0;
  for (size_t k = 0; k < out.size(); ++k) z += out[k] = std::exp(log_probs[k] - m);
  for (double &p : out) p /= z;
  return out;
}

ScoredNBest AssembleScoredNBest(std::vector<Hypothesis> hyps, std::vector<std::string> texts,
                                const std::vector<double> &consistency, int ref_word_count) {
  Require(!hyps.empty(), "N-best list is empty");
  Require(hyps.size() == texts.size() && hyps.size() == consistency.size(),
          "N-best pieces differ in length");
  Require(ref_word_count >= 1, "reference word count must be >= 1");
  std::vector<double> lps;
  for (const auto &h : hyps) lps.push_back(h.log_prob);
  std::vector<double> post = NormalizePosteriors(lps);
  ScoredNBest out;
  out.ref_word_count = ref_word_count;
  for (size_t k = 0; k < hyps.size(); ++k) {
    double s = consistency[k];
    if (!(s >= 0.0 && s <= 1.0))
      Fail(ErrorCode::kOutOfRange, "consistency score " + std::to_string(s) + " outside [0, 1]");
    ScoredHypothesis sh;
    sh.hyp = std::move(hyps[k]);
    sh.text = std::move(texts[k]);
    sh.posterior = post[k];
    sh.consistency = s;
    sh.scaled = ref_word_count * s;
    out.expected += sh.posterior * sh.scaled;
    out.hypotheses.push_back(std::move(sh));
  }
  return out;
}

ScoredNBest ExpectedConsistency(const NBestList &nbest, const Sample &sample,
                                const ConsistencyScorer &scorer, const Vocabulary &vocab) {
  std::vector<std::string> texts;
  std::vector<double> scores;
  for (const auto &h : nbest.hypotheses) {
    texts.push_back(vocab.Render(h.tokens));
    scores.push_back(scorer.Score(texts.back(), sample.reference));
  }
  return AssembleScoredNBest(nbest.hypotheses, std::move(texts), scores, sample.ref_word_count);
}

std::vector<double> FcmCoefficients(const ScoredNBest &scored) {
  std::vector<double> g;
  g.reserve(scored.hypotheses.size());
  for (const auto &h : scored.hypotheses) g.push_back(h.posterior * (h.scaled - scored.expected));
  return g;
}

std::vector<StepGradient> FcmStepGradients(const ScoredNBest &scored) {
  std::vector<double> coef = FcmCoefficients(scored);
  std::vector<StepGradient> out(coef.size());
  for (size_t k = 0; k < coef.size(); ++k) {
    std::vector<int> pred = scored.hypotheses[k].hyp.Predicted();
    for (size_t n = 0; n < pred.size(); ++n) out[k].Add(static_cast<int>(n), pred[n], coef[k]);
  }
  return out;
}

BeamOptions DecodeSettings::ForInput(size_t input_len) const {
  BeamOptions o;
  o.beam_size = beam_size;
  o.max_len = max_len > 0 ? max_len : static_cast<int>(input_len) + 8;
  o.length_normalize = length_normalize;
  return o;
}

NBestList DecodeNBest(const ModelParams &params, const std::vector<int> &input,
                      const DecodeSettings &settings) {
  Require(settings.nbest_size >= 1 && settings.nbest_size <= settings.beam_size,
          "nbest_size must be in [1, beam_size]");
  NBestList list = BeamDecode(params, input, settings.ForInput(input.size()));
  if (list.hypotheses.size() > static_cast<size_t>(settings.nbest_size))
    list.hypotheses.resize(settings.nbest_size);
  return list;
}

ParamGradients FcmGradientForScored(const ModelParams &params, const std::vector<int> &input,
                                    const ScoredNBest &scored) {
  std::vector<StepGradient> signals = FcmStepGradients(scored);
  ParamGradients total = params.ZerosLike();
  for (size_t k = 0; k < signals.size(); ++k) {
    bool any = std::any_of(signals[k].cells.begin(), signals[k].cells.end(),
                           [](const GradCell &c) { return c.value != 0.0; });
    if (!any) continue;
    ForwardTrace trace = ForwardTeacher(params, input, scored.hypotheses[k].hyp.Conditioning());
    total.AddScaled(Backward(params, trace, signals[k]), 1.0);
  }
  return total;
}

SampleGradient FcmSampleGradient(const ModelParams &params, const Vocabulary &vocab,
                                 const Sample &sample, const ConsistencyScorer &scorer,
                                 const DecodeSettings &settings) {
  NBestList nbest = DecodeNBest(params, sample.input, settings);
  SampleGradient out;
  out.scored = ExpectedConsistency(nbest, sample, scorer, vocab);
  out.gradients = FcmGradientForScored(params, sample.input, out.scored);
  return out;
}

std::vector<double> FcmSampleObjectives(const Corpus &corpus, const ModelParams &params,
                                        const Vocabulary &vocab, const ConsistencyScorer &scorer,
                                        const DecodeSettings &settings) {
  std::vector<double> per(corpus.size(), 0.0);
  ParallelFor(corpus.size(), [&](size_t r) {
    const Sample &s = corpus.samples[r];
    try {
      NBestList nbest = DecodeNBest(params, s.input, settings);
      per[r] = ExpectedConsistency(nbest, s, scorer, vocab).expected;
    } catch (const Error &e) {
      throw Error(e.code(), "sample " + s.id + ": " + e.what());
    }
  });
  return per;
}

double FcmCorpusObjective(const Corpus &corpus, const ModelParams &params,
                          const Vocabulary &vocab, const ConsistencyScorer &scorer,
                          const DecodeSettings &settings) {
  double total = 0.0;
  for (double c : FcmSampleObjectives(corpus, params, vocab, scorer, settings)) total += c;
  return total;
}

}  // namespace fcm
