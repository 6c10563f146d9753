// src/capi.cpp

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

#include "fcm/fcm.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <set>
#include <string>

#include "corpus.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "objective.hpp"
#include "scorers.hpp"
#include "summeval.hpp"
#include "trainer.hpp"
#include "util.hpp"

using nlohmann::json;

struct fcm_corpus {
  fcm::Corpus corpus;
};
struct fcm_model {
  fcm::Model model;
};
struct fcm_scorer {
  std::unique_ptr<fcm::ConsistencyScorer> scorer;
};
struct fcm_summarizer {
  std::unique_ptr<fcm::Summarizer> summarizer;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
fcm_status Guard(Fn &&fn) {
  g_last_error.clear();
  try {
    fn();
    return FCM_OK;
  } catch (const fcm::Error &e) {
    g_last_error = e.what();
    return static_cast<fcm_status>(e.code());
  } catch (const json::exception &e) {
    g_last_error = std::string("JSON: ") + e.what();
    return FCM_ERR_PARSE;
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return FCM_ERR_INTERNAL;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return FCM_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return FCM_ERR_INTERNAL;
  }
}

void NotNull(const void *p, const char *what) {
  if (p == nullptr) fcm::Fail(fcm::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char *Dup(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json ParseJson(const char *text, const char *what) {
  if (text == nullptr || *text == '\0') return json::object();
  try {
    json j = json::parse(text);
    if (!j.is_object()) fcm::Fail(fcm::ErrorCode::kParse, std::string(what) + " must be an object");
    return j;
  } catch (const json::parse_error &e) {
    fcm::Fail(fcm::ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

fcm::DecodeSettings ParseDecode(const json &j) {
  for (const auto &[k, v] : j.items())
    fcm::Require(k == "beam_size" || k == "nbest_size" || k == "max_len" ||
                     k == "length_normalize",
                 "unknown decode key '" + k + "'");
  fcm::DecodeSettings d;
  d.beam_size = j.value("beam_size", d.beam_size);
  d.nbest_size = j.value("nbest_size", d.nbest_size);
  d.max_len = j.value("max_len", d.max_len);
  d.length_normalize = j.value("length_normalize", d.length_normalize);
  fcm::Require(d.beam_size >= 1, "beam_size must be >= 1");
  fcm::Require(d.nbest_size >= 1 && d.nbest_size <= d.beam_size,
               "nbest_size must be in [1, beam_size]");
  fcm::Require(d.max_len >= 0, "max_len must be >= 0");
  return d;
}

json ResultJson(const fcm::TrainResult &r) {
  json log = json::array();
  for (const auto &rec : r.log) log.push_back(rec.ToJson());
  json out = {{"iterations_run", r.iterations_run}, {"log", log}};
  if (r.guard) out["guard"] = r.guard->ToJson();
  return out;
}

fcm::ProgressFn Progress(fcm_progress_fn fn, void *user) {
  if (fn == nullptr) return {};
  return [fn, user](const fcm::MetricsRecord &rec) { fn(rec.ToJson().dump().c_str(), user); };
}

std::vector<double> Scores(const json &j) {
  std::vector<double> out;
  for (const auto &v : j) out.push_back(v.get<double>());
  return out;
}

}  // namespace

extern "C" {

const char *fcm_version(void) { return "1.0.0"; }

const char *fcm_status_name(fcm_status status) {
  switch (status) {
    case FCM_OK: return "ok";
    case FCM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FCM_ERR_IO: return "i/o error";
    case FCM_ERR_PARSE: return "parse error";
    case FCM_ERR_NETWORK: return "network error";
    case FCM_ERR_TIMEOUT: return "timeout";
    case FCM_ERR_BAD_RESPONSE: return "bad response";
    case FCM_ERR_OUT_OF_RANGE: return "out of range";
    case FCM_ERR_NUMERIC: return "numeric error";
    case FCM_ERR_GUARD_TRIPPED: return "deletion guard tripped";
    case FCM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char *fcm_last_error(void) { return g_last_error.c_str(); }

void fcm_string_free(char *s) { std::free(s); }

fcm_status fcm_set_threads(int n) {
  return Guard([&] {
    fcm::Require(n >= 0, "thread count must be >= 0");
    fcm::SetThreadCount(n);
  });
}

fcm_status fcm_write_file_atomic(const char *path, const char *data, size_t size) {
  return Guard([&] {
    NotNull(path, "path");
    if (size > 0) NotNull(data, "data");
    fcm::WriteFileAtomic(path, std::string(data == nullptr ? "" : data, size));
  });
}

// ------------------------------------------------------------------ corpus

fcm_status fcm_corpus_generate(const char *config_json, fcm_corpus **out) {
  return Guard([&] {
    NotNull(out, "out");
    fcm::SynthConfig cfg = fcm::SynthConfig::FromJson(ParseJson(config_json, "corpus config"));
    *out = new fcm_corpus{fcm::GenerateSyntheticCorpus(cfg)};
  });
}

fcm_status fcm_corpus_default_config(char **out_json) {
  return Guard([&] {
    NotNull(out_json, "out_json");
    *out_json = Dup(fcm::SynthConfig::Defaults().ToJson().dump());
  });
}

fcm_status fcm_corpus_load(const char *path, fcm_corpus **out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new fcm_corpus{fcm::LoadCorpus(path)};
  });
}

fcm_status fcm_corpus_save(const fcm_corpus *corpus, const char *path) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    NotNull(path, "path");
    fcm::SaveCorpus(corpus->corpus, path);
  });
}

fcm_status fcm_corpus_size(const fcm_corpus *corpus, size_t *out) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    NotNull(out, "out");
    *out = corpus->corpus.size();
  });
}

fcm_status fcm_corpus_slice(const fcm_corpus *corpus, size_t begin, size_t end,
                            fcm_corpus **out) {
  return Guard([&] {
    NotNull(corpus, "corpus");
    NotNull(out, "out");
    *out = new fcm_corpus{corpus->corpus.Slice(begin, end)};
  });
}

void fcm_corpus_free(fcm_corpus *corpus) { delete corpus; }

// ------------------------------------------------------------------- model

fcm_status fcm_model_init(const fcm_corpus *const *corpora, size_t n_corpora, int dim,
                          uint64_t seed, fcm_model **out) {
  return Guard([&] {
    NotNull(corpora, "corpora");
    NotNull(out, "out");
    fcm::Require(n_corpora >= 1, "need at least one corpus");
    fcm::Require(dim >= 1, "dim must be >= 1");
    std::set<std::string> tokens;
    int source = 1;
    for (size_t k = 0; k < n_corpora; ++k) {
      NotNull(corpora[k], "corpus");
      const fcm::Corpus &c = corpora[k]->corpus;
      const auto &toks = c.vocab.tokens();
      tokens.insert(toks.begin() + 2, toks.end());
      source = std::max(source, c.source_vocab_size);
    }
    std::vector<std::string> list = {fcm::Vocabulary::kBosToken, fcm::Vocabulary::kEosToken};
    list.insert(list.end(), tokens.begin(), tokens.end());
    fcm::Vocabulary vocab(std::move(list));
    fcm::ModelParams params = fcm::InitParams(dim, source, vocab.size(), seed);
    *out = new fcm_model{fcm::Model{std::move(vocab), std::move(params)}};
  });
}

fcm_status fcm_model_load(const char *path, fcm_model **out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new fcm_model{fcm::LoadCheckpoint(path)};
  });
}

fcm_status fcm_model_save(const fcm_model *model, const char *path) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(path, "path");
    fcm::SaveCheckpoint(model->model, path);
  });
}

fcm_status fcm_model_info(const fcm_model *model, char **out_json) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(out_json, "out_json");
    const fcm::ModelParams &p = model->model.params;
    json j = {{"d", p.dim},
              {"source_vocab", p.src_embed.rows()},
              {"target_vocab", p.tgt_embed.rows()},
              {"parameters", p.ParameterCount()}};
    *out_json = Dup(j.dump());
  });
}

void fcm_model_free(fcm_model *model) { delete model; }

// ------------------------------------------------------------------ scorer

fcm_status fcm_scorer_create(const char *spec_json, fcm_scorer **out) {
  return Guard([&] {
    NotNull(spec_json, "spec_json");
    NotNull(out, "out");
    *out = new fcm_scorer{fcm::MakeScorer(ParseJson(spec_json, "scorer spec"))};
  });
}

fcm_status fcm_scorer_score(const fcm_scorer *scorer, const char *hypothesis,
                            const char *reference, double *out) {
  return Guard([&] {
    NotNull(scorer, "scorer");
    NotNull(hypothesis, "hypothesis");
    NotNull(reference, "reference");
    NotNull(out, "out");
    *out = scorer->scorer->Score(hypothesis, reference);
  });
}

void fcm_scorer_free(fcm_scorer *scorer) { delete scorer; }

// -------------------------------------------------------------- summarizer

fcm_status fcm_summarizer_create(const char *spec_json, fcm_summarizer **out) {
  return Guard([&] {
    NotNull(spec_json, "spec_json");
    NotNull(out, "out");
    json spec = ParseJson(spec_json, "summarizer spec");
    fcm::Require(spec.contains("name") && spec["name"].is_string(),
                 "summarizer spec needs a \"name\"");
    std::string name = spec["name"].get<std::string>();
    if (name == "mock" || name == "lead-per-speaker") {
      for (const auto &[k, v] : spec.items())
        fcm::Require(k == "name", "unknown key '" + k + "' for summarizer " + name);
      *out = new fcm_summarizer{std::make_unique<fcm::MockSummarizer>()};
      return;
    }
    fcm::Require(name == "remote", "unknown summarizer '" + name + "'");
    for (const auto &[k, v] : spec.items())
      fcm::Require(k == "name" || k == "endpoint" || k == "timeout_ms" || k == "max_in_flight",
                   "unknown key '" + k + "' for summarizer remote");
    fcm::Require(spec.contains("endpoint"), "remote summarizer needs an \"endpoint\"");
    *out = new fcm_summarizer{std::make_unique<fcm::RemoteSummarizer>(
        spec["endpoint"].get<std::string>(),
        std::chrono::milliseconds(spec.value("timeout_ms", 30000)),
        spec.value("max_in_flight", 4))};
  });
}

fcm_status fcm_summarizer_summarize(const fcm_summarizer *summarizer, const char *prompt,
                                    const char *params_json, char **out) {
  return Guard([&] {
    NotNull(summarizer, "summarizer");
    NotNull(prompt, "prompt");
    NotNull(out, "out");
    fcm::SummarizerParams params =
        fcm::SummarizerParams::FromJson(ParseJson(params_json, "summarizer params"), {});
    *out = Dup(summarizer->summarizer->Summarize(prompt, params));
  });
}

void fcm_summarizer_free(fcm_summarizer *summarizer) { delete summarizer; }

// ---------------------------------------------------------------- training

fcm_status fcm_train_ce(fcm_model *model, const fcm_corpus *train, const fcm_corpus *dev,
                        const fcm_scorer *scorer, const char *schedule_json,
                        fcm_progress_fn progress, void *user, char **out_json) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(train, "train");
    fcm::TrainingSchedule schedule = fcm::TrainingSchedule::FromJson(
        ParseJson(schedule_json, "schedule"), fcm::TrainingSchedule::CeDefaults());
    fcm::TrainResult r =
        fcm::TrainCe(model->model, train->corpus, schedule, dev ? &dev->corpus : nullptr,
                     scorer ? scorer->scorer.get() : nullptr, Progress(progress, user));
    std::string result = ResultJson(r).dump();
    model->model.params = std::move(r.params);
    if (out_json != nullptr) *out_json = Dup(result);
  });
}

fcm_status fcm_train_fcm(fcm_model *model, const fcm_corpus *train, const fcm_scorer *scorer,
                         const fcm_corpus *dev, const char *schedule_json,
                         const char *safeguard_json, fcm_progress_fn progress, void *user,
                         char **out_json) {
  bool tripped = false;
  std::string guard_msg;
  fcm_status st = Guard([&] {
    NotNull(model, "model");
    NotNull(train, "train");
    NotNull(scorer, "scorer");
    NotNull(dev, "dev");
    fcm::TrainingSchedule schedule = fcm::TrainingSchedule::FromJson(
        ParseJson(schedule_json, "schedule"), fcm::TrainingSchedule::FcmDefaults());
    fcm::SafeguardConfig safeguard =
        fcm::SafeguardConfig::FromJson(ParseJson(safeguard_json, "safeguard"), {});
    fcm::TrainResult r = fcm::TrainFcm(model->model, train->corpus, *scorer->scorer, schedule,
                                       safeguard, dev->corpus, Progress(progress, user));
    std::string result = ResultJson(r).dump();
    model->model.params = std::move(r.params);
    if (out_json != nullptr) *out_json = Dup(result);
    if (r.guard) {
      tripped = true;
      char buf[160];
      std::snprintf(buf, sizeof(buf),
                    "deletion guard tripped at iteration %d: dev deletion rate %.4f > %.4f",
                    r.guard->iteration, r.guard->deletion_rate, r.guard->limit);
      guard_msg = buf;
    }
  });
  if (st == FCM_OK && tripped) {
    g_last_error = guard_msg;
    return FCM_ERR_GUARD_TRIPPED;
  }
  return st;
}

fcm_status fcm_training_defaults(char **out_json) {
  return Guard([&] {
    NotNull(out_json, "out_json");
    json j = {{"ce", fcm::TrainingSchedule::CeDefaults().ToJson()},
              {"fcm", fcm::TrainingSchedule::FcmDefaults().ToJson()},
              {"safeguard", fcm::SafeguardConfig{}.ToJson()}};
    *out_json = Dup(j.dump());
  });
}

// ------------------------------------------------------------------ decode

fcm_status fcm_decode(const fcm_model *model, const fcm_corpus *corpus, const char *decode_json,
                      char **out_jsonl) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(corpus, "corpus");
    NotNull(out_jsonl, "out_jsonl");
    fcm::DecodeSettings settings = ParseDecode(ParseJson(decode_json, "decode settings"));
    const fcm::Model &m = model->model;
    const auto &samples = corpus->corpus.samples;
    std::vector<std::string> lines(samples.size());
    fcm::ParallelFor(samples.size(), [&](size_t r) {
      const fcm::Sample &s = samples[r];
      try {
        fcm::NBestList nbest = fcm::DecodeNBest(m.params, s.input, settings);
        std::vector<double> lps;
        for (const auto &h : nbest.hypotheses) lps.push_back(h.log_prob);
        std::vector<double> post = fcm::NormalizePosteriors(lps);
        json list = json::array();
        for (size_t k = 0; k < nbest.hypotheses.size(); ++k) {
          const auto &h = nbest.hypotheses[k];
          list.push_back({{"text", m.vocab.Render(h.tokens)},
                          {"log_prob", h.log_prob},
                          {"posterior", post[k]},
                          {"truncated", h.truncated}});
        }
        json rec = fcm::SampleToJson(s);
        rec["text"] = list[0]["text"];
        rec["truncated"] = list[0]["truncated"];
        rec["nbest"] = std::move(list);
        lines[r] = rec.dump() + "\n";
      } catch (const fcm::Error &e) {
        throw fcm::Error(e.code(), "sample " + s.id + ": " + e.what());
      }
    });
    std::string out;
    for (const auto &l : lines) out += l;
    *out_jsonl = Dup(out);
  });
}

// -------------------------------------------------------------- evaluation

fcm_status fcm_eval_utt(const char *hypothesis_jsonl, const fcm_scorer *scorer, double threshold,
                        char **out_json) {
  return Guard([&] {
    NotNull(hypothesis_jsonl, "hypothesis_jsonl");
    NotNull(scorer, "scorer");
    NotNull(out_json, "out_json");
    std::vector<fcm::Utterance> hyp = fcm::ParseUtterancesJsonl(hypothesis_jsonl, "text");
    std::vector<fcm::Utterance> ref = fcm::ParseUtterancesJsonl(hypothesis_jsonl, "reference");
    fcm::Require(!hyp.empty(), "no utterances to evaluate");
    std::vector<fcm::TextPair> pairs;
    for (size_t k = 0; k < hyp.size(); ++k) pairs.emplace_back(hyp[k].text, ref[k].text);
    fcm::EditBreakdown e = fcm::CorpusWer(pairs);
    fcm::ConsistencySummary c = fcm::AvgConsistency(pairs, *scorer->scorer);
    json j = {{"n", pairs.size()},
              {"wer", e.wer()},
              {"substitutions", e.substitutions},
              {"insertions", e.insertions},
              {"deletions", e.deletions},
              {"ref_words", e.ref_words},
              {"avg_consistency", c.mean},
              {"consistent_ratio", fcm::ConsistentRatio(c.scores, threshold)},
              {"threshold", threshold},
              {"scores", c.scores}};
    *out_json = Dup(j.dump());
  });
}

fcm_status fcm_metrics_report(const char *systems_json, char **out_csv, char **out_markdown) {
  return Guard([&] {
    NotNull(systems_json, "systems_json");
    json j = json::parse(systems_json);
    fcm::Require(j.is_array(), "systems must be a JSON array");
    std::vector<fcm::SystemMetrics> systems;
    for (const auto &sj : j) {
      fcm::SystemMetrics sys;
      sys.system = sj.at("system").get<std::string>();
      for (const auto &mj : sj.at("splits")) {
        fcm::UttMetrics m;
        m.split = mj.at("split").get<std::string>();
        m.errors.substitutions = mj.at("substitutions").get<long>();
        m.errors.insertions = mj.at("insertions").get<long>();
        m.errors.deletions = mj.at("deletions").get<long>();
        m.errors.ref_words = mj.at("ref_words").get<long>();
        m.avg_consistency = mj.at("avg_consistency").get<double>();
        m.consistent_ratio = mj.at("consistent_ratio").get<double>();
        m.n = mj.at("n").get<size_t>();
        sys.splits.push_back(std::move(m));
      }
      systems.push_back(std::move(sys));
    }
    std::string csv = fcm::MetricsCsv(systems);
    std::string md = fcm::MetricsMarkdown(systems);
    if (out_csv != nullptr) *out_csv = Dup(csv);
    if (out_markdown != nullptr) *out_markdown = Dup(md);
  });
}

fcm_status fcm_eval_sum(const char *reference_jsonl, const char *hypothesis_jsonl,
                        const fcm_summarizer *summarizer, const fcm_scorer *scorer,
                        const char *params_json, double chunk_seconds, char **out_json) {
  return Guard([&] {
    NotNull(reference_jsonl, "reference_jsonl");
    NotNull(hypothesis_jsonl, "hypothesis_jsonl");
    NotNull(summarizer, "summarizer");
    NotNull(scorer, "scorer");
    NotNull(out_json, "out_json");
    fcm::SummarizerParams params =
        fcm::SummarizerParams::FromJson(ParseJson(params_json, "summarizer params"), {});
    double window = chunk_seconds > 0 ? chunk_seconds : 60.0;
    std::vector<fcm::Utterance> ref = fcm::ParseUtterancesJsonl(reference_jsonl, "reference");
    std::vector<fcm::Utterance> hyp = fcm::ParseUtterancesJsonl(hypothesis_jsonl, "text");
    fcm::SummaryEvaluation ev = fcm::EvaluateSummaries(ref, hyp, *summarizer->summarizer,
                                                       *scorer->scorer, params, window);
    std::vector<fcm::SessionChunk> chunks = fcm::ChunkAll(ref, window);
    json list = json::array();
    for (size_t k = 0; k < chunks.size(); ++k)
      list.push_back({{"session", chunks[k].session},
                      {"start", chunks[k].start},
                      {"end", chunks[k].end},
                      {"summary", ev.summaries[k]},
                      {"score", ev.scores[k]}});
    json j = {{"mean", ev.mean}, {"scores", ev.scores}, {"chunks", list}};
    *out_json = Dup(j.dump());
  });
}

fcm_status fcm_ttest(const double *a, const double *b, size_t n, fcm_ttest_result *out) {
  return Guard([&] {
    NotNull(out, "out");
    if (n > 0) {
      NotNull(a, "a");
      NotNull(b, "b");
    }
    std::vector<double> va(a, a + n), vb(b, b + n);
    fcm::TTestResult r = fcm::PairedTTest(va, vb);
    out->t_statistic = r.t_statistic;
    out->degrees_of_freedom = r.degrees_of_freedom;
    out->p_value_two_tailed = r.p_value_two_tailed;
    out->significant_at_95 = r.significant_at_95 ? 1 : 0;
  });
}

}  // extern "C"
