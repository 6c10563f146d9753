// src/trainer.hpp

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

#ifndef FCM_TRAINER_HPP_
#define FCM_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "json.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "objective.hpp"
#include "scorers.hpp"

namespace fcm {

struct TrainingSchedule {
  int total_iterations = 1;
  double initial_lr = 1e-3;
  std::string lr_decay = "linear";  // to zero at total_iterations
  int batch_size = 1;
  int beam_size = 4;
  int nbest_size = 4;
  uint64_t seed = 1;
  int checkpoint_every = 100;
  int max_len = 0;  // decode length cap; 0 = input length + 8

  // Desk-scale defaults for the two stages.
  static TrainingSchedule CeDefaults();
  static TrainingSchedule FcmDefaults();

  void Validate() const;
  DecodeSettings Decode() const;
  // Keys absent from j keep the values of `base`; unknown keys are rejected.
  static TrainingSchedule FromJson(const nlohmann::json &j, const TrainingSchedule &base);
  nlohmann::json ToJson() const;
};

struct SafeguardConfig {
  int max_fcm_iterations = 2000;
  double deletion_rate_limit = 0.25;
  int dev_check_every = 50;
  double ce_interpolation_weight = 0.0;

  void Validate() const;
  static SafeguardConfig FromJson(const nlohmann::json &j, const SafeguardConfig &base);
  nlohmann::json ToJson() const;
};

/// initial_lr * (1 - step / total), for 0 <= step < total.
double LinearDecayLr(int step, int total, double initial_lr);

/// True iff deletions / reference words > limit.
bool DeletionGuardTrips(const EditBreakdown &dev_errors, double limit);

struct MetricsRecord {
  int iter = 0;
  double lr = 0.0;
  double dev_wer = 0.0;
  double dev_del_rate = 0.0;
  double dev_avg_consistency = 0.0;
  double dev_fcm_objective = 0.0;

  nlohmann::json ToJson() const;
};

struct DevEvaluation {
  EditBreakdown errors;
  double avg_consistency = 0.0;
  double fcm_objective = 0.0;
  std::vector<std::string> hypotheses;  // top-1 text per sample
  std::vector<double> consistency;      // top-1 score per sample
};

/// Beam-decodes every sample once; the top hypothesis feeds WER and average
/// consistency, the N-best list feeds the objective.
DevEvaluation EvaluateDev(const Model &model, const Corpus &dev, const ConsistencyScorer &scorer,
                          const DecodeSettings &settings);

struct GuardReport {
  int iteration = 0;         // check that tripped
  double deletion_rate = 0;  // measured there
  double limit = 0;
  int restored_iteration = -1;  // checkpoint returned instead; -1 if none passed

  nlohmann::json ToJson() const;
};

struct TrainResult {
  ModelParams params;
  std::vector<MetricsRecord> log;
  std::optional<GuardReport> guard;
  int iterations_run = 0;
};

using ProgressFn = std::function<void(const MetricsRecord &)>;

/// Teacher-forced cross-entropy training by gradient ascent on the
/// log-likelihood. When dev is non-empty, a record is logged at iteration 0,
/// every checkpoint_every iterations and at the end.
TrainResult TrainCe(const Model &model, const Corpus &train, const TrainingSchedule &schedule,
                    const Corpus *dev, const ConsistencyScorer *scorer,
                    const ProgressFn &progress = {});

/// Consistency maximization. Each iteration: draw a batch, decode its N-best
/// lists with the current parameters, score them, backpropagate the
/// per-hypothesis signals, optionally blend in the CE gradient, and take one
/// ascent step at the linearly decayed rate. Stops at
/// min(total_iterations, max_fcm_iterations). Dev is checked every
/// dev_check_every iterations and at the end; if the deletion rate exceeds
/// the limit, training stops and the best passing checkpoint is returned with
/// a guard report.
TrainResult TrainFcm(const Model &model, const Corpus &train, const ConsistencyScorer &scorer,
                     const TrainingSchedule &schedule, const SafeguardConfig &safeguard,
                     const Corpus &dev, const ProgressFn &progress = {});

/// Mean per-token negative log-likelihood of the references (EOS included).
double CorpusNll(const Model &model, const Corpus &corpus);

std::string MetricsLogJsonl(const std::vector<MetricsRecord> &log);

}  // namespace fcm

#endif  // FCM_TRAINER_HPP_
