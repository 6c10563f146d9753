// include/fcm/fcm.h

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

/*
 * C interface to the FCM toolkit.
 *
 * Conventions:
 *  - Every fallible call returns an fcm_status. On failure the message is
 *    available from fcm_last_error() on the same thread until the next call.
 *  - Objects are opaque handles released with their *_free function; NULL is
 *    accepted by every *_free.
 *  - Structured inputs and outputs are UTF-8 JSON strings. Strings returned
 *    through a char** are owned by the caller and released with
 *    fcm_string_free.
 *  - Output pointers are left untouched on failure.
 */

#ifndef FCM_FCM_H_
#define FCM_FCM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(FCM_BUILDING_LIBRARY)
#define FCM_API __attribute__((visibility("default")))
#else
#define FCM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fcm_status {
  FCM_OK = 0,
  FCM_ERR_INVALID_ARGUMENT = 1,
  FCM_ERR_IO = 2,
  FCM_ERR_PARSE = 3,
  FCM_ERR_NETWORK = 4,
  FCM_ERR_TIMEOUT = 5,
  FCM_ERR_BAD_RESPONSE = 6,
  FCM_ERR_OUT_OF_RANGE = 7,
  FCM_ERR_NUMERIC = 8,
  FCM_ERR_GUARD_TRIPPED = 9,
  FCM_ERR_INTERNAL = 10
} fcm_status;

typedef struct fcm_corpus fcm_corpus;
typedef struct fcm_model fcm_model;
typedef struct fcm_scorer fcm_scorer;
typedef struct fcm_summarizer fcm_summarizer;

/* ------------------------------------------------------------------ misc */

FCM_API const char *fcm_version(void);
FCM_API const char *fcm_status_name(fcm_status status);
/* Message of the last failed call on this thread; "" if none. */
FCM_API const char *fcm_last_error(void);
FCM_API void fcm_string_free(char *s);

/* Worker threads for parallel sections; 0 means one per hardware thread. */
FCM_API fcm_status fcm_set_threads(int n);

/* Writes `size` bytes through a temporary file and a rename. */
FCM_API fcm_status fcm_write_file_atomic(const char *path, const char *data, size_t size);

/* ---------------------------------------------------------------- corpus */

/* config_json: synthetic-corpus settings; "{}" selects the defaults. */
FCM_API fcm_status fcm_corpus_generate(const char *config_json, fcm_corpus **out);
/* The defaults as a JSON object. */
FCM_API fcm_status fcm_corpus_default_config(char **out_json);
FCM_API fcm_status fcm_corpus_load(const char *path, fcm_corpus **out);
FCM_API fcm_status fcm_corpus_save(const fcm_corpus *corpus, const char *path);
FCM_API fcm_status fcm_corpus_size(const fcm_corpus *corpus, size_t *out);
/* Samples [begin, end). */
FCM_API fcm_status fcm_corpus_slice(const fcm_corpus *corpus, size_t begin, size_t end,
                                    fcm_corpus **out);
FCM_API void fcm_corpus_free(fcm_corpus *corpus);

/* ----------------------------------------------------------------- model */

/* Random model whose vocabularies cover every corpus in `corpora`. */
FCM_API fcm_status fcm_model_init(const fcm_corpus *const *corpora, size_t n_corpora, int dim,
                                  uint64_t seed, fcm_model **out);
FCM_API fcm_status fcm_model_load(const char *path, fcm_model **out);
FCM_API fcm_status fcm_model_save(const fcm_model *model, const char *path);
/* {"d", "source_vocab", "target_vocab", "parameters"} */
FCM_API fcm_status fcm_model_info(const fcm_model *model, char **out_json);
FCM_API void fcm_model_free(fcm_model *model);

/* ---------------------------------------------------------------- scorer */

/*
 * spec_json: {"name": "exact_match" | "lcs" | "weighted_f1" | "remote", ...}.
 * weighted_f1 takes "weights", "default_weight" and "synth" (a synthetic
 * corpus config whose content/filler weights are used); remote takes
 * "endpoint", "timeout_ms" and "max_in_flight".
 */
FCM_API fcm_status fcm_scorer_create(const char *spec_json, fcm_scorer **out);
FCM_API fcm_status fcm_scorer_score(const fcm_scorer *scorer, const char *hypothesis,
                                    const char *reference, double *out);
FCM_API void fcm_scorer_free(fcm_scorer *scorer);

/* ------------------------------------------------------------ summarizer */

/* spec_json: {"name": "mock"} or {"name": "remote", "endpoint", "timeout_ms",
 * "max_in_flight"}. */
FCM_API fcm_status fcm_summarizer_create(const char *spec_json, fcm_summarizer **out);
/* params_json: {"temperature", "top_p", "max_tokens"}; NULL for defaults. */
FCM_API fcm_status fcm_summarizer_summarize(const fcm_summarizer *summarizer, const char *prompt,
                                            const char *params_json, char **out);
FCM_API void fcm_summarizer_free(fcm_summarizer *summarizer);

/* -------------------------------------------------------------- training */

/* Called with one metrics record (a JSON object) per dev check. */
typedef void (*fcm_progress_fn)(const char *record_json, void *user);

/*
 * Cross-entropy training; `model` is updated in place. dev and scorer may
 * be NULL (no dev records). schedule_json overrides the CE defaults.
 * out_json: {"iterations_run", "log": [records]}; may be NULL.
 */
FCM_API fcm_status fcm_train_ce(fcm_model *model, const fcm_corpus *train, const fcm_corpus *dev,
                                const fcm_scorer *scorer, const char *schedule_json,
                                fcm_progress_fn progress, void *user, char **out_json);

/*
 * Consistency-maximization training; `model` is updated in place.
 * schedule_json and safeguard_json override the FCM defaults.
 * When the deletion guard trips, the call returns FCM_ERR_GUARD_TRIPPED,
 * `model` holds the best checkpoint that passed the guard (or is unchanged if
 * none did), and out_json carries {"iterations_run", "log", "guard"}.
 */
FCM_API fcm_status fcm_train_fcm(fcm_model *model, const fcm_corpus *train,
                                 const fcm_scorer *scorer, const fcm_corpus *dev,
                                 const char *schedule_json, const char *safeguard_json,
                                 fcm_progress_fn progress, void *user, char **out_json);

/* Default schedules and safeguards as JSON objects. */
FCM_API fcm_status fcm_training_defaults(char **out_json);

/* ---------------------------------------------------------------- decode */

/*
 * Beam-decodes every sample. decode_json: {"beam_size", "nbest_size",
 * "max_len", "length_normalize"}; NULL for defaults. Output is JSONL, one
 * object per sample: the corpus fields plus "text", "truncated" and
 * "nbest": [{"text", "log_prob", "posterior", "truncated"}].
 */
FCM_API fcm_status fcm_decode(const fcm_model *model, const fcm_corpus *corpus,
                              const char *decode_json, char **out_jsonl);

/* ------------------------------------------------------------ evaluation */

/*
 * Utterance-level metrics of a hypothesis JSONL (records with "reference"
 * and "text"). out_json: {"n", "wer", "substitutions", "insertions",
 * "deletions", "ref_words", "avg_consistency", "consistent_ratio",
 * "scores": [...]}.
 */
FCM_API fcm_status fcm_eval_utt(const char *hypothesis_jsonl, const fcm_scorer *scorer,
                                double threshold, char **out_json);

/*
 * Renders tables from [{"system", "splits": [{"split", <fcm_eval_utt
 * output>}]}]. Either output may be NULL.
 */
FCM_API fcm_status fcm_metrics_report(const char *systems_json, char **out_csv,
                                      char **out_markdown);

/*
 * Summarization evaluation over 60 s chunks (chunk_seconds <= 0 selects 60).
 * reference_jsonl uses "reference" as utterance text, hypothesis_jsonl uses
 * "text". out_json: {"mean", "scores": [...], "chunks": [{"session",
 * "start", "end", "summary", "score"}]}.
 */
FCM_API fcm_status fcm_eval_sum(const char *reference_jsonl, const char *hypothesis_jsonl,
                                const fcm_summarizer *summarizer, const fcm_scorer *scorer,
                                const char *params_json, double chunk_seconds, char **out_json);

typedef struct fcm_ttest_result {
  double t_statistic;
  int degrees_of_freedom;
  double p_value_two_tailed;
  int significant_at_95;
} fcm_ttest_result;

/* Paired t-test on a[k] - b[k]. */
FCM_API fcm_status fcm_ttest(const double *a, const double *b, size_t n, fcm_ttest_result *out);

#ifdef __cplusplus
}
#endif

#endif /* FCM_FCM_H_ */
