// src/objective.hpp

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

// Factual-consistency-maximization objective.
//
// For a sample r with reference length |Y_r| (words) and N-best list B(X_r):
//
//   P^(Y)   = P(Y|X_r) / sum_{Y' in B} P(Y'|X_r)
//   C_r     = sum_{Y in B} P^(Y) * |Y_r| * Consistency(Y; Y_r)
//   F       = sum_r C_r
//
// and the signal injected at every decoder step n of hypothesis Y, at the
// token Y emits there, is
//
//   dF/dlog o_{n,i} = P^(Y) * (|Y_r| * Consistency(Y; Y_r) - C_r).
//
// The N-best set is held fixed while differentiating; it is re-decoded on
// every training step.

#ifndef FCM_OBJECTIVE_HPP_
#define FCM_OBJECTIVE_HPP_

#include <string>
#include <vector>

#include "beam.hpp"
#include "corpus.hpp"
#include "model.hpp"
#include "scorers.hpp"

namespace fcm {

struct ScoredHypothesis {
  Hypothesis hyp;
  std::string text;          // rendered hypothesis handed to the scorer
  double posterior = 0.0;    // normalized over the list
  double consistency = 0.0;  // in [0, 1]
  double scaled = 0.0;       // ref_word_count * consistency
};

struct ScoredNBest {
  std::vector<ScoredHypothesis> hypotheses;
  int ref_word_count = 0;
  double expected = 0.0;  // C_r

  // Throws kNumeric if the posteriors or C_r break their invariants.
  void Validate() const;
};

/// Softmax of raw log-probabilities with max subtraction.
std::vector<double> NormalizePosteriors(const std::vector<double> &log_probs);

/// Assembles a ScoredNBest from precomputed pieces. Used directly by tests and
/// by ExpectedConsistency.
ScoredNBest AssembleScoredNBest(std::vector<Hypothesis> hyps, std::vector<std::string> texts,
                                const std::vector<double> &consistency, int ref_word_count);

ScoredNBest ExpectedConsistency(const NBestList &nbest, const Sample &sample,
                                const ConsistencyScorer &scorer, const Vocabulary &vocab);

/// The per-hypothesis coefficient P^(Y) (|Y_r| s_Y - C_r), in list order.
std::vector<double> FcmCoefficients(const ScoredNBest &scored);

/// One StepGradient per hypothesis: its coefficient at every (step, emitted
/// token) cell of its trajectory, EOS step included when present.
std::vector<StepGradient> FcmStepGradients(const ScoredNBest &scored);

struct DecodeSettings {
  int beam_size = 4;
  int nbest_size = 4;  // <= beam_size; the list is cut to this many
  int max_len = 0;     // 0: input length + 8
  bool length_normalize = false;

  BeamOptions ForInput(size_t input_len) const;
};

NBestList DecodeNBest(const ModelParams &params, const std::vector<int> &input,
                      const DecodeSettings &settings);

struct SampleGradient {
  ScoredNBest scored;
  ParamGradients gradients;
};

/// decode, score, inject the FCM signals, then backward through every hypothesis,
/// summed. The backward passes run over immutable params.
SampleGradient FcmSampleGradient(const ModelParams &params, const Vocabulary &vocab,
                                 const Sample &sample, const ConsistencyScorer &scorer,
                                 const DecodeSettings &settings);

/// Backward through a fixed, already-scored N-best list.
ParamGradients FcmGradientForScored(const ModelParams &params, const std::vector<int> &input,
                                    const ScoredNBest &scored);

/// sum_r C_r over the corpus under the current parameters.
double FcmCorpusObjective(const Corpus &corpus, const ModelParams &params,
                          const Vocabulary &vocab, const ConsistencyScorer &scorer,
                          const DecodeSettings &settings);

/// Per-sample C_r, in corpus order.
std::vector<double> FcmSampleObjectives(const Corpus &corpus, const ModelParams &params,
                                        const Vocabulary &vocab, const ConsistencyScorer &scorer,
                                        const DecodeSettings &settings);

}  // namespace fcm

#endif  // FCM_OBJECTIVE_HPP_
