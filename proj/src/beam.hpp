// src/beam.hpp

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

#ifndef FCM_BEAM_HPP_
#define FCM_BEAM_HPP_

#include <vector>

#include "model.hpp"

namespace fcm {

struct Hypothesis {
  std::vector<int> tokens;  // no BOS, no EOS
  double log_prob = 0.0;    // includes the EOS step unless truncated
  bool truncated = false;   // hit max_len without emitting EOS

  // [BOS, y_1, ...] fed to the decoder when rescoring this hypothesis.
  std::vector<int> Conditioning() const;
  // Token predicted at each step of Conditioning(): y_1, ..., then EOS.
  std::vector<int> Predicted() const;
};

struct NBestList {
  std::vector<Hypothesis> hypotheses;  // best first
  int beam_size = 0;
};

struct BeamOptions {
  int beam_size = 4;
  int max_len = 32;  // decoder steps, EOS included
  // Rank by log_prob / steps instead of raw log_prob. Off by default.
  bool length_normalize = false;
};

/// Beam search returning up to beam_size hypotheses. A hypothesis leaves the
/// beam when it emits EOS; each step keeps the best (beam_size - finished)
/// expansions, so beam_size = 1 is exactly greedy decoding. Ties break by
/// lexicographic token order.
NBestList BeamDecode(const ModelParams &params, const std::vector<int> &input,
                     const BeamOptions &options);

NBestList BeamDecode(const ModelParams &params, const std::vector<int> &input, int beam_size,
                     int max_len);

/// log P(tokens [+ EOS] | input) under teacher forcing.
double SequenceLogProb(const ModelParams &params, const std::vector<int> &input,
                       const std::vector<int> &tokens, bool include_eos = true);

double SequenceLogProb(const ModelParams &params, const std::vector<int> &input,
                       const Hypothesis &hyp);

}  // namespace fcm

#endif  // FCM_BEAM_HPP_
