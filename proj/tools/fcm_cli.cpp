// tools/fcm_cli.cpp

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

// Command line front end. Talks to the toolkit only through the C API.
//
// Exit status: 0 success, 1 usage error, 2 runtime error.

#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fcm/fcm.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeError : std::runtime_error {
  RuntimeError(fcm_status s, const std::string &what) : std::runtime_error(what), status(s) {}
  fcm_status status;
};

void Check(fcm_status s) {
  if (s != FCM_OK) throw RuntimeError(s, fcm_last_error());
}

// Owns a string returned by the library.
std::string Take(char *s) {
  std::string out = s ? s : "";
  fcm_string_free(s);
  return out;
}

template <typename T, void (*Free)(T *)>
struct Handle {
  T *p = nullptr;
  Handle() = default;
  Handle(const Handle &) = delete;
  Handle &operator=(const Handle &) = delete;
  ~Handle() { Free(p); }
  T *operator->() const { return p; }
  T **out() { return &p; }
};
using Corpus = Handle<fcm_corpus, fcm_corpus_free>;
using Model = Handle<fcm_model, fcm_model_free>;
using Scorer = Handle<fcm_scorer, fcm_scorer_free>;
using Summarizer = Handle<fcm_summarizer, fcm_summarizer_free>;

std::string ReadText(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError(FCM_ERR_IO, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteText(const std::string &path, const std::string &data) {
  Check(fcm_write_file_atomic(path.c_str(), data.data(), data.size()));
}

// ----------------------------------------------------------- config merging

enum class Kind { kInt, kDouble, kString, kBool };

struct Flag {
  std::string key;
  Kind kind;
  std::string value;
  bool set = false;
  CLI::Option *opt = nullptr;
};

// A subcommand whose settings come from an optional JSON config file with
// flag overrides on top. Config keys are the flag names with '_' for '-'.
class Command {
 public:
  Command(CLI::App &parent, const std::string &name, const std::string &help)
      : app_(parent.add_subcommand(name, help)), name_(name) {
    app_->add_option("--config", config_path_, "JSON file with settings; flags win");
  }

  void Add(const std::string &flag, Kind kind, const std::string &help) {
    Flag &f = flags_.emplace_back();
    f.key = flag;
    for (char &c : f.key)
      if (c == '-') c = '_';
    f.kind = kind;
    if (kind == Kind::kBool)
      f.opt = app_->add_flag("--" + flag, f.set, help);
    else
      f.opt = app_->add_option("--" + flag, f.value, help);
  }

  // Keys accepted only from the config file.
  void AllowConfigKey(const std::string &key) { extra_.insert(key); }

  CLI::App *app() const { return app_; }
  const std::string &name() const { return name_; }

  json Resolve() const {
    json cfg = json::object();
    if (!config_path_.empty()) {
      if (!fs::exists(config_path_)) throw UsageError("config file not found: " + config_path_);
      try {
        cfg = json::parse(ReadText(config_path_));
      } catch (const json::parse_error &e) {
        throw UsageError("config " + config_path_ + ": " + e.what());
      }
      if (!cfg.is_object()) throw UsageError("config " + config_path_ + " must be a JSON object");
    }
    std::set<std::string> known = extra_;
    for (const auto &f : flags_) known.insert(f.key);
    for (const auto &[k, v] : cfg.items())
      if (!known.count(k)) throw UsageError("unknown config key '" + k + "'");
    for (const auto &f : flags_) {
      if (f.opt->count() == 0) continue;
      try {
        switch (f.kind) {
          case Kind::kInt: {
            size_t used = 0;
            long long v = std::stoll(f.value, &used);
            if (used != f.value.size()) throw std::invalid_argument("trailing text");
            cfg[f.key] = v;
            break;
          }
          case Kind::kDouble: {
            size_t used = 0;
            double v = std::stod(f.value, &used);
            if (used != f.value.size()) throw std::invalid_argument("trailing text");
            cfg[f.key] = v;
            break;
          }
          case Kind::kString: cfg[f.key] = f.value; break;
          case Kind::kBool: cfg[f.key] = true; break;
        }
      } catch (const std::logic_error &) {
        throw UsageError("--" + f.opt->get_name().substr(2) + ": not a number: " + f.value);
      }
    }
    return cfg;
  }

 private:
  CLI::App *app_;
  std::string name_;
  std::string config_path_;
  std::deque<Flag> flags_;
  std::set<std::string> extra_;
};

std::string Str(const json &cfg, const std::string &key, const std::string &fallback = "") {
  if (!cfg.contains(key)) return fallback;
  if (!cfg[key].is_string()) throw UsageError("'" + key + "' must be a string");
  return cfg[key].get<std::string>();
}

std::string Required(const json &cfg, const std::string &key) {
  std::string v = Str(cfg, key);
  if (v.empty()) {
    std::string flag = key;
    for (char &c : flag)
      if (c == '_') c = '-';
    throw UsageError("--" + flag + " is required");
  }
  return v;
}

void RequireInput(const std::string &path) {
  if (!fs::exists(path)) throw UsageError("input file not found: " + path);
}

void RequireOutputDir(const std::string &path) {
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw UsageError("output directory does not exist: " + parent.string());
}

// Copies the listed keys (when present) into a new object.
json Pick(const json &cfg, const std::vector<std::string> &keys) {
  json out = json::object();
  for (const auto &k : keys)
    if (cfg.contains(k)) out[k] = cfg[k];
  return out;
}

const char *Env(const char *name) {
  const char *v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? v : nullptr;
}

// --scorer accepts a name or an inline JSON spec; config files may also
// give an object.
json ScorerSpec(const json &cfg) {
  if (!cfg.contains("scorer")) throw UsageError("--scorer is required");
  json spec;
  if (cfg["scorer"].is_object()) {
    spec = cfg["scorer"];
  } else {
    std::string s = Str(cfg, "scorer");
    if (!s.empty() && s.front() == '{') {
      try {
        spec = json::parse(s);
      } catch (const json::parse_error &e) {
        throw UsageError(std::string("--scorer: ") + e.what());
      }
    } else if (s == "synth_f1") {
      spec = {{"name", "weighted_f1"}, {"synth", json::object()}};
    } else if (s == "exact_match" || s == "lcs" || s == "weighted_f1" || s == "remote") {
      spec = {{"name", s}};
    } else {
      throw UsageError("unknown scorer '" + s +
                       "' (exact_match, lcs, weighted_f1, synth_f1, remote or a JSON spec)");
    }
  }
  if (spec.value("name", "") == "remote" && !spec.contains("endpoint")) {
    std::string url = Str(cfg, "scorer_url");
    if (url.empty() && Env("FCM_SCORER_URL")) url = Env("FCM_SCORER_URL");
    if (url.empty()) throw UsageError("remote scorer needs --scorer-url or FCM_SCORER_URL");
    spec["endpoint"] = url;
  }
  return spec;
}

void MakeScorer(const json &cfg, Scorer &scorer) {
  Check(fcm_scorer_create(ScorerSpec(cfg).dump().c_str(), scorer.out()));
}

void PrintRecord(const char *record, void *user) {
  std::fprintf(stderr, "[%s] %s\n", static_cast<const char *>(user), record);
}

std::string MetricsJsonl(const json &result) {
  std::string out;
  for (const auto &rec : result.at("log")) out += rec.dump() + "\n";
  return out;
}

std::string Num(double v) { return json(v).dump(); }

// ---------------------------------------------------------------- commands

void RunGenData(const json &cfg) {
  json synth = Pick(cfg, {"seed", "min_len", "max_len", "confusion_table", "negation_drop_rate",
                          "content_weight", "filler_weight"});
  if (cfg.contains("n")) synth["n_samples"] = cfg["n"];
  std::string out = Str(cfg, "out"), out_dir = Str(cfg, "out_dir"), split = Str(cfg, "split");
  if (out.empty() == out_dir.empty()) throw UsageError("give exactly one of --out and --out-dir");
  if (!out_dir.empty() && split.empty()) throw UsageError("--out-dir needs --split");
  std::vector<size_t> sizes;
  if (!split.empty()) {
    std::stringstream ss(split);
    std::string part;
    size_t total = 0;
    while (std::getline(ss, part, ',')) {
      try {
        sizes.push_back(std::stoul(part));
      } catch (const std::logic_error &) {
        throw UsageError("--split: not a count list: " + split);
      }
      total += sizes.back();
    }
    if (sizes.empty() || sizes.size() > 3) throw UsageError("--split takes 1 to 3 counts");
    if (!cfg.contains("n")) synth["n_samples"] = total;
    if (synth["n_samples"].get<long long>() != static_cast<long long>(total))
      throw UsageError("--split counts must add up to --n");
  }
  if (!out.empty()) RequireOutputDir(out);
  if (!out_dir.empty() && !fs::is_directory(out_dir))
    throw UsageError("output directory does not exist: " + out_dir);

  Corpus corpus;
  Check(fcm_corpus_generate(synth.dump().c_str(), corpus.out()));
  if (!out.empty()) {
    Check(fcm_corpus_save(corpus.p, out.c_str()));
    return;
  }
  static const char *kNames[] = {"train", "dev", "test"};
  size_t begin = 0;
  for (size_t k = 0; k < sizes.size(); ++k) {
    Corpus part;
    Check(fcm_corpus_slice(corpus.p, begin, begin + sizes[k], part.out()));
    Check(fcm_corpus_save(part.p, (fs::path(out_dir) / (std::string(kNames[k]) + ".jsonl")).c_str()));
    begin += sizes[k];
  }
}

json ScheduleOverrides(const json &cfg) {
  json s = Pick(cfg, {"batch_size", "beam_size", "nbest_size", "seed", "checkpoint_every",
                      "max_len"});
  if (cfg.contains("iterations")) s["total_iterations"] = cfg["iterations"];
  if (cfg.contains("lr")) s["initial_lr"] = cfg["lr"];
  return s;
}

void RunTrainCe(const json &cfg) {
  std::string train_path = Required(cfg, "train"), out = Required(cfg, "out");
  std::string dev_path = Str(cfg, "dev"), init = Str(cfg, "init");
  RequireInput(train_path);
  if (!dev_path.empty()) RequireInput(dev_path);
  if (!init.empty()) RequireInput(init);
  RequireOutputDir(out);
  std::string metrics_out = Str(cfg, "metrics_out");
  if (!metrics_out.empty()) RequireOutputDir(metrics_out);
  json schedule = ScheduleOverrides(cfg);

  Corpus train, dev;
  Check(fcm_corpus_load(train_path.c_str(), train.out()));
  if (!dev_path.empty()) Check(fcm_corpus_load(dev_path.c_str(), dev.out()));
  Scorer scorer;
  if (!dev_path.empty()) {
    json with_default = cfg;
    if (!with_default.contains("scorer")) with_default["scorer"] = "synth_f1";
    MakeScorer(with_default, scorer);
  }
  Model model;
  if (!init.empty()) {
    Check(fcm_model_load(init.c_str(), model.out()));
  } else {
    std::vector<const fcm_corpus *> corpora = {train.p};
    if (dev.p) corpora.push_back(dev.p);
    long long dim = cfg.value("dim", 64LL), seed = cfg.value("model_seed", 1LL);
    if (dim < 1) throw UsageError("--dim must be >= 1");
    Check(fcm_model_init(corpora.data(), corpora.size(), static_cast<int>(dim),
                         static_cast<uint64_t>(seed), model.out()));
  }
  char *result = nullptr;
  char tag[] = "train-ce";
  Check(fcm_train_ce(model.p, train.p, dev.p, scorer.p, schedule.dump().c_str(), PrintRecord, tag,
                     &result));
  json r = json::parse(Take(result));
  Check(fcm_model_save(model.p, out.c_str()));
  if (!metrics_out.empty()) WriteText(metrics_out, MetricsJsonl(r));
}

void RunTrainFcm(const json &cfg) {
  std::string init = Required(cfg, "init"), train_path = Required(cfg, "train");
  std::string dev_path = Required(cfg, "dev"), out = Required(cfg, "out");
  json scorer_spec = ScorerSpec(cfg);
  RequireInput(init);
  RequireInput(train_path);
  RequireInput(dev_path);
  RequireOutputDir(out);
  std::string metrics_out = Str(cfg, "metrics_out");
  if (!metrics_out.empty()) RequireOutputDir(metrics_out);
  json schedule = ScheduleOverrides(cfg);
  json safeguard = json::object();
  if (cfg.contains("max_iterations")) safeguard["max_fcm_iterations"] = cfg["max_iterations"];
  if (cfg.contains("deletion_limit")) safeguard["deletion_rate_limit"] = cfg["deletion_limit"];
  if (cfg.contains("dev_check_every")) safeguard["dev_check_every"] = cfg["dev_check_every"];
  if (cfg.contains("ce_weight")) safeguard["ce_interpolation_weight"] = cfg["ce_weight"];

  Corpus train, dev;
  Check(fcm_corpus_load(train_path.c_str(), train.out()));
  Check(fcm_corpus_load(dev_path.c_str(), dev.out()));
  Scorer scorer;
  Check(fcm_scorer_create(scorer_spec.dump().c_str(), scorer.out()));
  Model model;
  Check(fcm_model_load(init.c_str(), model.out()));
  char *result = nullptr;
  char tag[] = "train-fcm";
  fcm_status st = fcm_train_fcm(model.p, train.p, scorer.p, dev.p, schedule.dump().c_str(),
                                safeguard.dump().c_str(), PrintRecord, tag, &result);
  if (st != FCM_OK && st != FCM_ERR_GUARD_TRIPPED) Check(st);
  std::string guard_msg = st == FCM_ERR_GUARD_TRIPPED ? fcm_last_error() : "";
  json r = json::parse(Take(result));
  if (!metrics_out.empty()) WriteText(metrics_out, MetricsJsonl(r));
  if (st == FCM_ERR_GUARD_TRIPPED) {
    int restored = r["guard"]["restored_iteration"].get<int>();
    std::fprintf(stderr, "guard report: %s\n", r["guard"].dump().c_str());
    if (restored >= 0) {
      Check(fcm_model_save(model.p, out.c_str()));
      guard_msg += "; wrote the checkpoint from iteration " + std::to_string(restored);
    } else {
      guard_msg += "; no checkpoint passed the guard, nothing written";
    }
    throw RuntimeError(st, guard_msg);
  }
  Check(fcm_model_save(model.p, out.c_str()));
}

void RunDecode(const json &cfg) {
  std::string model_path = Required(cfg, "model"), data = Required(cfg, "data");
  std::string out = Required(cfg, "out");
  RequireInput(model_path);
  RequireInput(data);
  RequireOutputDir(out);
  json settings = Pick(cfg, {"beam_size", "nbest_size", "max_len", "length_normalize"});
  Model model;
  Check(fcm_model_load(model_path.c_str(), model.out()));
  Corpus corpus;
  Check(fcm_corpus_load(data.c_str(), corpus.out()));
  char *jsonl = nullptr;
  Check(fcm_decode(model.p, corpus.p, settings.dump().c_str(), &jsonl));
  WriteText(out, Take(jsonl));
}

struct HypSpec {
  std::string system, split, path;
};

// SYSTEM:SPLIT=PATH, SYSTEM=PATH or PATH.
HypSpec ParseHyp(const std::string &arg) {
  HypSpec h;
  size_t eq = arg.find('=');
  h.path = eq == std::string::npos ? arg : arg.substr(eq + 1);
  std::string label = eq == std::string::npos ? "" : arg.substr(0, eq);
  size_t colon = label.find(':');
  h.system = colon == std::string::npos ? label : label.substr(0, colon);
  h.split = colon == std::string::npos ? "" : label.substr(colon + 1);
  if (h.system.empty()) h.system = "system";
  if (h.split.empty()) h.split = fs::path(h.path).stem().string();
  return h;
}

void RunEvalUtt(const json &cfg, const std::vector<std::string> &hyp_args) {
  std::vector<std::string> args = hyp_args;
  if (cfg.contains("hyp")) {
    if (!cfg["hyp"].is_array()) throw UsageError("config 'hyp' must be a list");
    for (const auto &v : cfg["hyp"]) args.push_back(v.get<std::string>());
  }
  if (args.empty()) throw UsageError("--hyp is required");
  std::vector<HypSpec> hyps;
  for (const auto &a : args) {
    hyps.push_back(ParseHyp(a));
    RequireInput(hyps.back().path);
  }
  json with_default = cfg;
  if (!with_default.contains("scorer")) with_default["scorer"] = "synth_f1";
  double threshold = cfg.value("threshold", 0.5);
  std::string csv_out = Str(cfg, "csv"), md_out = Str(cfg, "md"), scores_dir = Str(cfg, "scores_dir");
  if (!csv_out.empty()) RequireOutputDir(csv_out);
  if (!md_out.empty()) RequireOutputDir(md_out);
  if (!scores_dir.empty() && !fs::is_directory(scores_dir))
    throw UsageError("scores directory does not exist: " + scores_dir);

  Scorer scorer;
  MakeScorer(with_default, scorer);
  json systems = json::array();
  for (const auto &h : hyps) {
    char *out = nullptr;
    fcm_status st = fcm_eval_utt(ReadText(h.path).c_str(), scorer.p, threshold, &out);
    if (st != FCM_OK) throw RuntimeError(st, h.path + ": " + fcm_last_error());
    json m = json::parse(Take(out));
    if (!scores_dir.empty())
      WriteText((fs::path(scores_dir) / (h.system + "." + h.split + ".scores.json")).string(),
                json(m["scores"]).dump() + "\n");
    m["split"] = h.split;
    json *sys = nullptr;
    for (auto &s : systems)
      if (s["system"] == h.system) sys = &s;
    if (sys == nullptr) {
      systems.push_back({{"system", h.system}, {"splits", json::array()}});
      sys = &systems.back();
    }
    (*sys)["splits"].push_back(m);
  }
  char *csv = nullptr, *md = nullptr;
  Check(fcm_metrics_report(systems.dump().c_str(), &csv, &md));
  std::string csv_s = Take(csv), md_s = Take(md);
  if (!csv_out.empty()) WriteText(csv_out, csv_s);
  if (!md_out.empty()) WriteText(md_out, md_s);
  std::fputs(md_s.c_str(), stdout);
}

void RunEvalSum(const json &cfg) {
  std::string ref = Required(cfg, "ref"), hyp = Required(cfg, "hyp");
  RequireInput(ref);
  RequireInput(hyp);
  std::string out = Str(cfg, "out"), scores_out = Str(cfg, "scores_out");
  if (!out.empty()) RequireOutputDir(out);
  if (!scores_out.empty()) RequireOutputDir(scores_out);
  json with_default = cfg;
  if (!with_default.contains("scorer")) with_default["scorer"] = "synth_f1";
  json params = Pick(cfg, {"temperature", "top_p", "max_tokens"});
  double chunk = cfg.value("chunk_seconds", 60.0);
  if (!(chunk > 0)) throw UsageError("--chunk-seconds must be > 0");

  std::string name = Str(cfg, "summarizer", "remote");
  json spec;
  if (name == "mock") {
    spec = {{"name", "mock"}};
  } else if (name == "remote") {
    std::string url = Str(cfg, "summarizer_url");
    if (url.empty() && Env("FCM_SUMMARIZER_URL")) url = Env("FCM_SUMMARIZER_URL");
    if (url.empty())
      throw UsageError(
          "remote summarizer needs --summarizer-url or FCM_SUMMARIZER_URL (or --summarizer mock)");
    spec = {{"name", "remote"}, {"endpoint", url}};
  } else {
    throw UsageError("unknown summarizer '" + name + "' (mock or remote)");
  }
  Summarizer summarizer;
  Check(fcm_summarizer_create(spec.dump().c_str(), summarizer.out()));
  Scorer scorer;
  MakeScorer(with_default, scorer);
  char *result = nullptr;
  Check(fcm_eval_sum(ReadText(ref).c_str(), ReadText(hyp).c_str(), summarizer.p, scorer.p,
                     params.dump().c_str(), chunk, &result));
  json r = json::parse(Take(result));
  if (!out.empty()) WriteText(out, r.dump(2) + "\n");
  if (!scores_out.empty()) WriteText(scores_out, r["scores"].dump() + "\n");
  std::printf("chunks=%zu mean_consistency=%s\n", r["scores"].size(),
              Num(r["mean"].get<double>()).c_str());
}

std::vector<double> ReadScores(const std::string &path) {
  RequireInput(path);
  json j;
  try {
    j = json::parse(ReadText(path));
  } catch (const json::parse_error &e) {
    throw RuntimeError(FCM_ERR_PARSE, path + ": " + e.what());
  }
  if (j.is_object() && j.contains("scores")) j = j["scores"];
  if (!j.is_array()) throw RuntimeError(FCM_ERR_PARSE, path + ": expected a list of scores");
  std::vector<double> out;
  for (const auto &v : j) {
    if (!v.is_number()) throw RuntimeError(FCM_ERR_PARSE, path + ": non-numeric score");
    out.push_back(v.get<double>());
  }
  return out;
}

void RunTTest(const json &cfg) {
  std::string a_path = Required(cfg, "a"), b_path = Required(cfg, "b");
  std::string out = Str(cfg, "out");
  if (!out.empty()) RequireOutputDir(out);
  std::vector<double> a = ReadScores(a_path), b = ReadScores(b_path);
  if (a.size() != b.size())
    throw RuntimeError(FCM_ERR_INVALID_ARGUMENT, "score lists differ in length (" +
                                                     std::to_string(a.size()) + " vs " +
                                                     std::to_string(b.size()) + ")");
  fcm_ttest_result r;
  Check(fcm_ttest(a.data(), b.data(), a.size(), &r));
  json j = {{"t_statistic", r.t_statistic},
            {"degrees_of_freedom", r.degrees_of_freedom},
            {"p_value_two_tailed", r.p_value_two_tailed},
            {"significant_at_95", r.significant_at_95 != 0}};
  if (!out.empty()) WriteText(out, j.dump(2) + "\n");
  std::printf("t=%s df=%d p=%s significant_at_95=%s\n", Num(r.t_statistic).c_str(),
              r.degrees_of_freedom, Num(r.p_value_two_tailed).c_str(),
              r.significant_at_95 ? "true" : "false");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Factual-consistency-maximization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  Command gen(app, "gen-data", "generate a synthetic corpus");
  gen.Add("seed", Kind::kInt, "generator seed");
  gen.Add("n", Kind::kInt, "number of samples");
  gen.Add("min-len", Kind::kInt, "shortest sentence in words");
  gen.Add("max-len", Kind::kInt, "longest sentence in words");
  gen.Add("negation-drop-rate", Kind::kDouble, "chance a negation is mumbled");
  gen.Add("content-weight", Kind::kDouble, "scorer weight of content words");
  gen.Add("filler-weight", Kind::kDouble, "scorer weight of fillers");
  gen.Add("out", Kind::kString, "output JSONL");
  gen.Add("out-dir", Kind::kString, "directory for train/dev/test JSONL");
  gen.Add("split", Kind::kString, "sizes, e.g. 1000,200,200");
  gen.AllowConfigKey("confusion_table");

  Command ce(app, "train-ce", "cross-entropy training");
  Command fcm(app, "train-fcm", "consistency-maximization training");
  for (Command *c : {&ce, &fcm}) {
    c->Add("train", Kind::kString, "training corpus JSONL");
    c->Add("dev", Kind::kString, "dev corpus JSONL");
    c->Add("init", Kind::kString, "starting checkpoint");
    c->Add("out", Kind::kString, "output checkpoint");
    c->Add("metrics-out", Kind::kString, "metrics log JSONL");
    c->Add("scorer", Kind::kString, "consistency scorer (name or JSON)");
    c->Add("scorer-url", Kind::kString, "remote scorer endpoint");
    c->Add("iterations", Kind::kInt, "total iterations");
    c->Add("lr", Kind::kDouble, "initial learning rate");
    c->Add("batch-size", Kind::kInt, "samples per iteration");
    c->Add("beam-size", Kind::kInt, "beam width");
    c->Add("nbest-size", Kind::kInt, "N-best list size");
    c->Add("max-len", Kind::kInt, "decode length cap (0 = input length + 8)");
    c->Add("seed", Kind::kInt, "sample-order seed");
    c->Add("checkpoint-every", Kind::kInt, "iterations between dev records");
  }
  ce.Add("dim", Kind::kInt, "hidden width of a fresh model");
  ce.Add("model-seed", Kind::kInt, "initialisation seed of a fresh model");
  fcm.Add("max-iterations", Kind::kInt, "hard cap on iterations");
  fcm.Add("deletion-limit", Kind::kDouble, "dev deletion rate that stops training");
  fcm.Add("dev-check-every", Kind::kInt, "iterations between dev checks");
  fcm.Add("ce-weight", Kind::kDouble, "weight of the blended CE gradient");

  Command dec(app, "decode", "beam-decode a corpus to hypothesis JSONL");
  dec.Add("model", Kind::kString, "checkpoint");
  dec.Add("data", Kind::kString, "corpus JSONL");
  dec.Add("out", Kind::kString, "hypothesis JSONL");
  dec.Add("beam-size", Kind::kInt, "beam width");
  dec.Add("nbest-size", Kind::kInt, "N-best list size");
  dec.Add("max-len", Kind::kInt, "decode length cap (0 = input length + 8)");
  dec.Add("length-normalize", Kind::kBool, "rank by per-step log-probability");

  Command utt(app, "eval-utt", "WER, consistency and consistent-ratio tables");
  std::vector<std::string> hyp_args;
  utt.app()->add_option("--hyp", hyp_args, "hypothesis JSONL as [SYSTEM[:SPLIT]=]PATH");
  utt.AllowConfigKey("hyp");
  utt.Add("scorer", Kind::kString, "consistency scorer (default synth_f1)");
  utt.Add("scorer-url", Kind::kString, "remote scorer endpoint");
  utt.Add("threshold", Kind::kDouble, "consistent-ratio threshold");
  utt.Add("csv", Kind::kString, "CSV report");
  utt.Add("md", Kind::kString, "Markdown report");
  utt.Add("scores-dir", Kind::kString, "directory for per-utterance score lists");

  Command sum(app, "eval-sum", "summarization consistency over 60 s chunks");
  sum.Add("ref", Kind::kString, "reference utterances (corpus JSONL)");
  sum.Add("hyp", Kind::kString, "hypothesis utterances (decode JSONL)");
  sum.Add("summarizer", Kind::kString, "mock or remote");
  sum.Add("summarizer-url", Kind::kString, "remote summarizer endpoint");
  sum.Add("scorer", Kind::kString, "consistency scorer (default synth_f1)");
  sum.Add("scorer-url", Kind::kString, "remote scorer endpoint");
  sum.Add("temperature", Kind::kDouble, "summarizer temperature");
  sum.Add("top-p", Kind::kDouble, "summarizer top_p");
  sum.Add("max-tokens", Kind::kInt, "summarizer max_tokens");
  sum.Add("chunk-seconds", Kind::kDouble, "chunk length");
  sum.Add("out", Kind::kString, "result JSON");
  sum.Add("scores-out", Kind::kString, "per-chunk score list");

  Command tt(app, "ttest", "paired t-test on two score lists");
  tt.Add("a", Kind::kString, "first score list (JSON)");
  tt.Add("b", Kind::kString, "second score list (JSON)");
  tt.Add("out", Kind::kString, "result JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  std::string which;
  try {
    if (fcm_set_threads(threads) != FCM_OK) throw UsageError(fcm_last_error());
    for (Command *c : {&gen, &ce, &fcm, &dec, &utt, &sum, &tt}) {
      if (!c->app()->parsed()) continue;
      which = c->name();
      json cfg = c->Resolve();
      if (c == &gen) RunGenData(cfg);
      if (c == &ce) RunTrainCe(cfg);
      if (c == &fcm) RunTrainFcm(cfg);
      if (c == &dec) RunDecode(cfg);
      if (c == &utt) RunEvalUtt(cfg, hyp_args);
      if (c == &sum) RunEvalSum(cfg);
      if (c == &tt) RunTTest(cfg);
    }
  } catch (const UsageError &e) {
    std::fprintf(stderr, "%s: usage error: %s\n", which.c_str(), e.what());
    return 1;
  } catch (const RuntimeError &e) {
    std::fprintf(stderr, "%s: %s [%s]\n", which.c_str(), e.what(), fcm_status_name(e.status));
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "%s: error: %s\n", which.c_str(), e.what());
    return 2;
  }
  return 0;
}
