// src/trainer.cpp

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

#include "trainer.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "error.hpp"
#include "util.hpp"

namespace fcm {

using nlohmann::json;

// ------------------------------------------------------------------ configs

TrainingSchedule TrainingSchedule::CeDefaults() {
  TrainingSchedule s;
  s.total_iterations = 300000;
  s.initial_lr = 0.03;
  s.checkpoint_every = 30000;
  return s;
}

TrainingSchedule TrainingSchedule::FcmDefaults() {
  TrainingSchedule s;
  s.total_iterations = 2000;
  s.initial_lr = 0.01;
  s.checkpoint_every = 50;
  return s;
}

void TrainingSchedule::Validate() const {
  Require(total_iterations >= 0, "total_iterations must be >= 0");
  Require(initial_lr > 0.0 && std::isfinite(initial_lr), "initial_lr must be > 0");
  Require(lr_decay == "linear", "lr_decay must be \"linear\"");
  Require(batch_size >= 1, "batch_size must be >= 1");
  Require(beam_size >= 1, "beam_size must be >= 1");
  Require(nbest_size >= 1 && nbest_size <= beam_size, "nbest_size must be in [1, beam_size]");
  Require(checkpoint_every >= 1, "checkpoint_every must be >= 1");
  Require(max_len >= 0, "max_len must be >= 0");
}

DecodeSettings TrainingSchedule::Decode() const {
  DecodeSettings d;
  d.beam_size = beam_size;
  d.nbest_size = nbest_size;
  d.max_len = max_len;
  return d;
}

namespace {

void RejectUnknown(const json &j, const std::set<std::string> &keys, const char *what) {
  Require(j.is_object(), std::string(what) + " must be a JSON object");
  for (const auto &[k, v] : j.items())
    Require(keys.count(k) > 0, "unknown " + std::string(what) + " key '" + k + "'");
}

template <typename T>
void Take(const json &j, const char *key, T &out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

TrainingSchedule TrainingSchedule::FromJson(const json &j, const TrainingSchedule &base) {
  RejectUnknown(j,
                {"total_iterations", "initial_lr", "lr_decay", "batch_size", "beam_size",
                 "nbest_size", "seed", "checkpoint_every", "max_len"},
                "schedule");
  TrainingSchedule s = base;
  try {
    Take(j, "total_iterations", s.total_iterations);
    Take(j, "initial_lr", s.initial_lr);
    Take(j, "lr_decay", s.lr_decay);
    Take(j, "batch_size", s.batch_size);
    Take(j, "beam_size", s.beam_size);
    Take(j, "nbest_size", s.nbest_size);
    Take(j, "seed", s.seed);
    Take(j, "checkpoint_every", s.checkpoint_every);
    Take(j, "max_len", s.max_len);
  } catch (const json::exception &e) {
    Fail(ErrorCode::kParse, std::string("schedule: ") + e.what());
  }
  s.Validate();
  return s;
}

json TrainingSchedule::ToJson() const {
  return {{"total_iterations", total_iterations}, {"initial_lr", initial_lr},
          {"lr_decay", lr_decay},                 {"batch_size", batch_size},
          {"beam_size", beam_size},               {"nbest_size", nbest_size},
          {"seed", seed},                         {"checkpoint_every", checkpoint_every},
          {"max_len", max_len}};
}

void SafeguardConfig::Validate() const {
  Require(max_fcm_iterations >= 1, "max_fcm_iterations must be >= 1");
  Require(deletion_rate_limit > 0.0 && deletion_rate_limit <= 1.0,
          "deletion_rate_limit must be in (0, 1]");
  Require(dev_check_every >= 1, "dev_check_every must be >= 1");
  Require(ce_interpolation_weight >= 0.0 && ce_interpolation_weight < 1.0,
          "ce_interpolation_weight must be in [0, 1)");
}

SafeguardConfig SafeguardConfig::FromJson(const json &j, const SafeguardConfig &base) {
  RejectUnknown(j,
                {"max_fcm_iterations", "deletion_rate_limit", "dev_check_every",
                 "ce_interpolation_weight"},
                "safeguard");
  SafeguardConfig s = base;
  try {
    Take(j, "max_fcm_iterations", s.max_fcm_iterations);
    Take(j, "deletion_rate_limit", s.deletion_rate_limit);
    Take(j, "dev_check_every", s.dev_check_every);
    Take(j, "ce_interpolation_weight", s.ce_interpolation_weight);
  } catch (const json::exception &e) {
    Fail(ErrorCode::kParse, std::string("safeguard: ") + e.what());
  }
  s.Validate();
  return s;
}

json SafeguardConfig::ToJson() const {
  return {{"max_fcm_iterations", max_fcm_iterations},
          {"deletion_rate_limit", deletion_rate_limit},
          {"dev_check_every", dev_check_every},
          {"ce_interpolation_weight", ce_interpolation_weight}};
}

double LinearDecayLr(int step, int total, double initial_lr) {
  if (step < 0 || step >= total)
    Fail(ErrorCode::kInvalidArgument, "step " + std::to_string(step) + " outside [0, " +
                                          std::to_string(total) + ")");
  return initial_lr * (1.0 - static_cast<double>(step) / static_cast<double>(total));
}

bool DeletionGuardTrips(const EditBreakdown &dev_errors, double limit) {
  if (dev_errors.ref_words <= 0)
    Fail(ErrorCode::kInvalidArgument, "deletion guard needs reference words");
  return dev_errors.deletion_rate() > limit;
}

json MetricsRecord::ToJson() const {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"iter", iter},
          {"lr", lr},
          {"dev_wer", num(dev_wer)},
          {"dev_del_rate", num(dev_del_rate)},
          {"dev_avg_consistency", num(dev_avg_consistency)},
          {"dev_fcm_objective", num(dev_fcm_objective)}};
}

json GuardReport::ToJson() const {
  return {{"iteration", iteration},
          {"deletion_rate", deletion_rate},
          {"limit", limit},
          {"restored_iteration", restored_iteration}};
}

std::string MetricsLogJsonl(const std::vector<MetricsRecord> &log) {
  std::string out;
  for (const auto &r : log) out += r.ToJson().dump() + "\n";
  return out;
}

// --------------------------------------------------------------- evaluation

DevEvaluation EvaluateDev(const Model &model, const Corpus &dev, const ConsistencyScorer &scorer,
                          const DecodeSettings &settings) {
  Require(!dev.empty(), "dev corpus is empty");
  const size_t n = dev.size();
  std::vector<ScoredNBest> scored(n);
  ParallelFor(n, [&](size_t r) {
    const Sample &s = dev.samples[r];
    try {
      NBestList nbest = DecodeNBest(model.params, s.input, settings);
      scored[r] = ExpectedConsistency(nbest, s, scorer, model.vocab);
    } catch (const Error &e) {
      throw Error(e.code(), "sample " + s.id + ": " + e.what());
    }
  });
  DevEvaluation ev;
  std::vector<TextPair> pairs;
  double consistency_sum = 0;
  for (size_t r = 0; r < n; ++r) {
    const ScoredHypothesis &top = scored[r].hypotheses.front();
    ev.hypotheses.push_back(top.text);
    ev.consistency.push_back(top.consistency);
    consistency_sum += top.consistency;
    ev.fcm_objective += scored[r].expected;
    pairs.emplace_back(top.text, dev.samples[r].reference);
  }
  ev.errors = CorpusWer(pairs);
  ev.avg_consistency = consistency_sum / static_cast<double>(n);
  return ev;
}

namespace {

struct EncodedSample {
  const Sample *sample = nullptr;
  std::vector<int> conditioning;  // BOS + reference tokens
  StepGradient likelihood;        // +1 at every reference step, EOS included
};

EncodedSample EncodeForCe(const Vocabulary &vocab, const Sample &s) {
  EncodedSample e;
  e.sample = &s;
  std::vector<int> toks;
  try {
    toks = vocab.Encode(s.reference);
  } catch (const Error &err) {
    throw Error(err.code(), "sample " + s.id + ": " + err.what());
  }
  e.conditioning.push_back(Vocabulary::kBos);
  e.conditioning.insert(e.conditioning.end(), toks.begin(), toks.end());
  toks.push_back(Vocabulary::kEos);
  for (size_t n = 0; n < toks.size(); ++n) e.likelihood.Add(static_cast<int>(n), toks[n], 1.0);
  return e;
}

std::vector<EncodedSample> EncodeAll(const Vocabulary &vocab, const Corpus &corpus) {
  std::vector<EncodedSample> out;
  out.reserve(corpus.size());
  for (const auto &s : corpus.samples) out.push_back(EncodeForCe(vocab, s));
  return out;
}

// Log-likelihood of the reference and its gradient.
std::pair<double, ParamGradients> CeGradient(const ModelParams &params, const EncodedSample &e) {
  ForwardTrace trace = ForwardTeacher(params, e.sample->input, e.conditioning);
  double ll = 0;
  for (const auto &c : e.likelihood.cells) ll += trace.log_probs(c.step, c.token);
  return {ll, Backward(params, trace, e.likelihood)};
}

// Sequential pass over a fresh seeded permutation each epoch.
class BatchSampler {
 public:
  BatchSampler(size_t n, uint64_t seed) : n_(n), rng_(seed) {}
  std::vector<size_t> Next(size_t batch) {
    std::vector<size_t> out;
    while (out.size() < batch) {
      if (pos_ == order_.size()) {
        order_.resize(n_);
        for (size_t k = 0; k < n_; ++k) order_[k] = k;
        rng_.Shuffle(order_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  size_t n_;
  Rng rng_;
  std::vector<size_t> order_;
  size_t pos_ = 0;
};

MetricsRecord MakeRecord(int iter, double lr, const DevEvaluation &ev) {
  MetricsRecord r;
  r.iter = iter;
  r.lr = lr;
  r.dev_wer = ev.errors.wer();
  r.dev_del_rate = ev.errors.deletion_rate();
  r.dev_avg_consistency = ev.avg_consistency;
  r.dev_fcm_objective = ev.fcm_objective;
  return r;
}

// Sums per-sample gradients in batch order.
ParamGradients SumInOrder(const ModelParams &params, std::vector<ParamGradients> &parts) {
  ParamGradients total = params.ZerosLike();
  for (auto &p : parts) total.AddScaled(p, 1.0);
  return total;
}

}  // namespace

double CorpusNll(const Model &model, const Corpus &corpus) {
  Require(!corpus.empty(), "corpus is empty");
  std::vector<EncodedSample> enc = EncodeAll(model.vocab, corpus);
  std::vector<double> ll(enc.size());
  std::vector<size_t> steps(enc.size());
  ParallelFor(enc.size(), [&](size_t k) {
    ForwardTrace t = ForwardTeacher(model.params, enc[k].sample->input, enc[k].conditioning);
    double s = 0;
    for (const auto &c : enc[k].likelihood.cells) s += t.log_probs(c.step, c.token);
    ll[k] = s;
    steps[k] = enc[k].likelihood.cells.size();
  });
  double total = 0;
  size_t count = 0;
  for (size_t k = 0; k < enc.size(); ++k) {
    total += ll[k];
    count += steps[k];
  }
  return -total / static_cast<double>(count);
}

// ---------------------------------------------------------------- training

TrainResult TrainCe(const Model &model, const Corpus &train, const TrainingSchedule &schedule,
                    const Corpus *dev, const ConsistencyScorer *scorer,
                    const ProgressFn &progress) {
  schedule.Validate();
  Require(!train.empty(), "training corpus is empty");
  bool with_dev = dev != nullptr && !dev->empty();
  Require(!with_dev || scorer != nullptr, "dev evaluation needs a scorer");
  std::vector<EncodedSample> enc = EncodeAll(model.vocab, train);

  TrainResult result;
  result.params = model.params;
  Model current{model.vocab, model.params};
  DecodeSettings decode = schedule.Decode();
  auto log_dev = [&](int iter, double lr) {
    if (!with_dev) return;
    current.params = result.params;
    MetricsRecord rec = MakeRecord(iter, lr, EvaluateDev(current, *dev, *scorer, decode));
    result.log.push_back(rec);
    if (progress) progress(rec);
  };

  const int T = schedule.total_iterations;
  if (T > 0) log_dev(0, schedule.initial_lr);
  BatchSampler sampler(enc.size(), schedule.seed);
  for (int it = 0; it < T; ++it) {
    double lr = LinearDecayLr(it, T, schedule.initial_lr);
    std::vector<size_t> batch = sampler.Next(static_cast<size_t>(schedule.batch_size));
    std::vector<ParamGradients> parts(batch.size());
    std::vector<double> ll(batch.size());
    ParallelFor(batch.size(), [&](size_t b) {
      auto [l, g] = CeGradient(result.params, enc[batch[b]]);
      ll[b] = l;
      parts[b] = std::move(g);
    });
    double batch_ll = 0;
    for (double l : ll) batch_ll += l;
    if (!std::isfinite(batch_ll))
      Fail(ErrorCode::kNumeric, "non-finite CE loss at iteration " + std::to_string(it));
    ParamGradients grad = SumInOrder(result.params, parts);
    try {
      ApplyUpdate(result.params, grad, lr / static_cast<double>(batch.size()));
    } catch (const Error &e) {
      throw Error(e.code(), "iteration " + std::to_string(it) + ": " + e.what());
    }
    result.iterations_run = it + 1;
    if ((it + 1) % schedule.checkpoint_every == 0 || it + 1 == T)
      log_dev(it + 1, it + 1 < T ? LinearDecayLr(it + 1, T, schedule.initial_lr) : 0.0);
  }
  return result;
}

TrainResult TrainFcm(const Model &model, const Corpus &train, const ConsistencyScorer &scorer,
                     const TrainingSchedule &schedule, const SafeguardConfig &safeguard,
                     const Corpus &dev, const ProgressFn &progress) {
  schedule.Validate();
  safeguard.Validate();
  Require(!train.empty(), "training corpus is empty");
  Require(!dev.empty(), "consistency maximization needs a dev corpus for its safeguards");
  const double lambda = safeguard.ce_interpolation_weight;
  std::vector<EncodedSample> enc;
  if (lambda > 0.0) enc = EncodeAll(model.vocab, train);

  TrainResult result;
  result.params = model.params;
  DecodeSettings decode = schedule.Decode();
  const int T = schedule.total_iterations;
  const int stop = std::min(T, safeguard.max_fcm_iterations);

  // Best passing checkpoint so far, by dev objective.
  ModelParams best = model.params;
  int best_iter = -1;
  double best_objective = -std::numeric_limits<double>::infinity();

  // Returns false when the guard trips.
  auto check = [&](int iter, double lr) {
    Model current{model.vocab, result.params};
    DevEvaluation ev = EvaluateDev(current, dev, scorer, decode);
    MetricsRecord rec = MakeRecord(iter, lr, ev);
    result.log.push_back(rec);
    if (progress) progress(rec);
    if (DeletionGuardTrips(ev.errors, safeguard.deletion_rate_limit)) {
      GuardReport g;
      g.iteration = iter;
      g.deletion_rate = ev.errors.deletion_rate();
      g.limit = safeguard.deletion_rate_limit;
      g.restored_iteration = best_iter;
      result.guard = g;
      result.params = best;
      return false;
    }
    if (ev.fcm_objective > best_objective) {
      best_objective = ev.fcm_objective;
      best = result.params;
      best_iter = iter;
    }
    return true;
  };

  if (!check(0, T > 0 ? schedule.initial_lr : 0.0)) return result;
  BatchSampler sampler(train.size(), schedule.seed);
  for (int it = 0; it < stop; ++it) {
    double lr = LinearDecayLr(it, T, schedule.initial_lr);
    std::vector<size_t> batch = sampler.Next(static_cast<size_t>(schedule.batch_size));
    std::vector<ParamGradients> parts(batch.size());
    ParallelFor(batch.size(), [&](size_t b) {
      const Sample &s = train.samples[batch[b]];
      try {
        ParamGradients g =
            FcmSampleGradient(result.params, model.vocab, s, scorer, decode).gradients;
        if (lambda > 0.0) {
          ParamGradients ce = CeGradient(result.params, enc[batch[b]]).second;
          g.AddScaled(g, -lambda);  // (1 - lambda) * fcm
          g.AddScaled(ce, lambda);
        }
        parts[b] = std::move(g);
      } catch (const Error &e) {
        throw Error(e.code(),
                    "iteration " + std::to_string(it) + ", sample " + s.id + ": " + e.what());
      }
    });
    ParamGradients grad = SumInOrder(result.params, parts);
    try {
      ApplyUpdate(result.params, grad, lr / static_cast<double>(batch.size()));
    } catch (const Error &e) {
      throw Error(e.code(), "iteration " + std::to_string(it) + ": " + e.what());
    }
    result.iterations_run = it + 1;
    bool due = (it + 1) % safeguard.dev_check_every == 0 || it + 1 == stop;
    if (due && !check(it + 1, it + 1 < T ? LinearDecayLr(it + 1, T, schedule.initial_lr) : 0.0))
      return result;
  }
  return result;
}

}  // namespace fcm
