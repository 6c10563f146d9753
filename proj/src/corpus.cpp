// src/corpus.cpp

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

#include "corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "error.hpp"
#include "text.hpp"
#include "util.hpp"

namespace fcm {

using nlohmann::json;

// ---------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{kBosToken, kEosToken}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  Require(tokens_.size() >= 2 && tokens_[kBos] == kBosToken && tokens_[kEos] == kEosToken,
          "vocabulary must start with <s> and </s>");
  for (int k = 0; k < size(); ++k) {
    if (!index_.emplace(tokens_[k], k).second)
      Fail(ErrorCode::kInvalidArgument, "duplicate vocabulary token '" + tokens_[k] + "'");
  }
}

Vocabulary Vocabulary::FromTexts(const std::vector<std::string> &texts) {
  std::set<std::string> uniq;
  for (const auto &t : texts)
    for (auto &tok : TokenizeForModel(t)) uniq.insert(std::move(tok));
  uniq.erase(kBosToken);
  uniq.erase(kEosToken);
  std::vector<std::string> tokens{kBosToken, kEosToken};
  tokens.insert(tokens.end(), uniq.begin(), uniq.end());
  return Vocabulary(std::move(tokens));
}

std::optional<int> Vocabulary::Find(const std::string &token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Vocabulary::Encode(const std::string &text) const {
  std::vector<int> ids;
  for (const auto &tok : TokenizeForModel(text)) {
    auto id = Find(tok);
    if (!id) Fail(ErrorCode::kOutOfRange, "token '" + tok + "' is not in the vocabulary");
    ids.push_back(*id);
  }
  return ids;
}

std::string Vocabulary::Render(const std::vector<int> &ids) const {
  std::vector<std::string> toks;
  toks.reserve(ids.size());
  for (int id : ids) {
    if (id == kBos || id == kEos) continue;
    toks.push_back(token(id));
  }
  return Detokenize(toks);
}

Corpus Corpus::Slice(size_t begin, size_t end) const {
  Require(begin <= end && end <= samples.size(), "corpus slice out of range");
  Corpus out;
  out.samples.assign(samples.begin() + begin, samples.begin() + end);
  out.source_vocab_size = source_vocab_size;
  out.vocab = vocab;
  return out;
}

// ------------------------------------------------------------------- Lexicon

namespace synth {
namespace {

const std::vector<std::string> kOpeners = {"Well", "So", "Um", "Uh", "Okay"};
const std::vector<std::string> kSubjects = {"I", "we", "you", "they", "she"};
const std::vector<std::string> kModals = {"can", "should", "will", "did", "could", "would"};
const std::vector<std::string> kNegations = {"not", "never"};
const std::vector<std::string> kMidFillers = {"um", "uh"};
const std::vector<std::string> kVerbs = {"like", "need", "want", "see", "check",
                                         "change", "approve", "use", "remember", "find"};
const std::vector<std::string> kDeterminers = {"the", "a", "this", "that"};
const std::vector<std::string> kNouns = {"design", "budget", "button", "remote", "report",
                                         "price", "prize", "battery", "colour", "screen",
                                         "logo", "case", "market", "meeting"};
const std::vector<std::string> kTails = {"now", "today", "again", "too", "though", "anyway"};
const std::vector<std::string> kPunct = {",", ".", "?"};

std::string Capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

std::vector<std::string> AllTokens() {
  std::set<std::string> all;
  auto add = [&](const std::vector<std::string> &ws, bool cap) {
    for (const auto &w : ws) {
      all.insert(w);
      if (cap) all.insert(Capitalize(w));
    }
  };
  add(kOpeners, false);
  add(kSubjects, true);
  add(kModals, true);
  add(kNegations, false);
  add(kMidFillers, false);
  add(kVerbs, false);
  add(kDeterminers, false);
  add(kNouns, false);
  add(kTails, false);
  add(kPunct, false);
  all.insert("and");
  std::vector<std::string> tokens{Vocabulary::kBosToken, Vocabulary::kEosToken};
  tokens.insert(tokens.end(), all.begin(), all.end());
  return tokens;
}

std::string Lower(std::string w) {
  for (char &c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return w;
}

bool Contains(const std::vector<std::string> &v, const std::string &w) {
  return std::find(v.begin(), v.end(), w) != v.end();
}

}  // namespace

const Vocabulary &LexiconVocabulary() {
  static const Vocabulary vocab(AllTokens());
  return vocab;
}

bool IsNegation(const std::string &token) { return Contains(kNegations, Lower(token)); }

bool IsFiller(const std::string &token) {
  std::string w = Lower(token);
  return Contains(kMidFillers, w) || Contains({"well", "so", "um", "uh", "okay"}, w);
}

bool IsMidFiller(const std::string &token) { return Contains(kMidFillers, token); }

bool IsContent(const std::string &token) {
  std::string w = Lower(token);
  return Contains(kNegations, w) || Contains(kVerbs, w) || Contains(kNouns, w);
}

int CleanSymbol(const std::string &token) {
  auto id = LexiconVocabulary().Find(token);
  if (!id) Fail(ErrorCode::kInvalidArgument, "'" + token + "' is not a lexicon token");
  return *id;
}

}  // namespace synth

// -------------------------------------------------------------- SynthConfig

SynthConfig SynthConfig::Defaults() {
  SynthConfig c;
  c.confusion_table = {
      {"remote", {{"report", 0.1}}}, {"report", {{"remote", 0.1}}},
      {"price", {{"prize", 0.1}}},   {"prize", {{"price", 0.1}}},
      {"budget", {{"button", 0.08}}}, {"button", {{"budget", 0.08}}},
      {"the", {{"a", 0.05}}},        {"need", {{"see", 0.05}}},
  };
  return c;
}

void SynthConfig::Validate() const {
  Require(n_samples >= 0, "n_samples must be >= 0");
  Require(min_len >= 1, "min_len must be >= 1");
  Require(min_len <= max_len, "min_len must be <= max_len");
  Require(max_len >= synth::kShortestSentence,
          "max_len must be >= " + std::to_string(synth::kShortestSentence) +
              " (shortest synthetic sentence)");
  Require(negation_drop_rate >= 0.0 && negation_drop_rate <= 1.0,
          "negation_drop_rate must be in [0, 1]");
  Require(content_weight > 0.0, "content_weight must be > 0");
  Require(filler_weight > 0.0, "filler_weight must be > 0");
  const Vocabulary &lex = synth::LexiconVocabulary();
  for (const auto &[tok, alts] : confusion_table) {
    Require(lex.Find(tok).has_value(), "confusion_table key '" + tok + "' is not in the lexicon");
    double total = 0;
    for (const auto &[alt, w] : alts) {
      Require(lex.Find(alt).has_value(),
              "confusion_table entry '" + alt + "' is not in the lexicon");
      Require(w > 0.0, "confusion weight for '" + tok + "' -> '" + alt + "' must be > 0");
      total += w;
    }
    Require(total <= 1.0, "confusion weights for '" + tok + "' sum above 1");
  }
}

SynthConfig SynthConfig::FromJson(const json &j) {
  static const std::set<std::string> kKeys = {
      "n_samples", "seed", "min_len", "max_len", "confusion_table",
      "negation_drop_rate", "content_weight", "filler_weight"};
  Require(j.is_object(), "synth config must be a JSON object");
  for (const auto &[k, v] : j.items())
    Require(kKeys.count(k) > 0, "unknown synth config key '" + k + "'");
  SynthConfig c = Defaults();
  try {
    if (j.contains("n_samples")) c.n_samples = j.at("n_samples").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("min_len")) c.min_len = j.at("min_len").get<int>();
    if (j.contains("max_len")) c.max_len = j.at("max_len").get<int>();
    if (j.contains("negation_drop_rate"))
      c.negation_drop_rate = j.at("negation_drop_rate").get<double>();
    if (j.contains("content_weight")) c.content_weight = j.at("content_weight").get<double>();
    if (j.contains("filler_weight")) c.filler_weight = j.at("filler_weight").get<double>();
    if (j.contains("confusion_table")) {
      c.confusion_table.clear();
      for (const auto &[tok, alts] : j.at("confusion_table").items())
        for (const auto &pair : alts)
          c.confusion_table[tok].emplace_back(pair.at(0).get<std::string>(),
                                              pair.at(1).get<double>());
    }
  } catch (const json::exception &e) {
    Fail(ErrorCode::kParse, std::string("synth config: ") + e.what());
  }
  return c;
}

json SynthConfig::ToJson() const {
  json table = json::object();
  for (const auto &[tok, alts] : confusion_table) {
    json arr = json::array();
    for (const auto &[alt, w] : alts) arr.push_back({alt, w});
    table[tok] = arr;
  }
  return {{"n_samples", n_samples},           {"seed", seed},
          {"min_len", min_len},               {"max_len", max_len},
          {"confusion_table", table},         {"negation_drop_rate", negation_drop_rate},
          {"content_weight", content_weight}, {"filler_weight", filler_weight}};
}

// ----------------------------------------------------------------- Generator

namespace {

using synth::kDeterminers;
using synth::kMidFillers;
using synth::kModals;
using synth::kNegations;
using synth::kNouns;
using synth::kOpeners;
using synth::kSubjects;
using synth::kTails;
using synth::kVerbs;

constexpr int kSessionSize = 25;
constexpr int kSpeakers = 4;

const std::string &Pick(Rng &rng, const std::vector<std::string> &v) {
  return v[rng.Below(v.size())];
}

// Sentence with exactly `words` whitespace words (>= 5).
std::vector<std::string> DrawSentence(Rng &rng, int words) {
  bool question = rng.Bernoulli(0.2);
  // Longer sentences carry one word after the modal: a negation or a filler.
  bool slot = words > synth::kShortestSentence;
  bool negate = slot && rng.Bernoulli(synth::kNegationSlotRate);
  bool mid = slot && !negate;
  int spare = words - synth::kShortestSentence - (slot ? 1 : 0);
  // Up to two single-word extras; the rest becomes "and <det> <noun>".
  int min_conj = std::max(0, (spare - 2 + 2) / 3);
  int max_conj = spare / 3;
  int conj = min_conj + static_cast<int>(rng.Below(max_conj - min_conj + 1));
  int singles = spare - 3 * conj;
  bool first = rng.Bernoulli(0.5);  // which extra comes first
  bool opener = singles >= 2 || (singles == 1 && first);
  bool tail = singles >= 2 || (singles == 1 && !first);

  std::vector<std::string> toks;
  if (opener) {
    toks.push_back(Pick(rng, kOpeners));
    toks.push_back(",");
  }
  const std::string &subject = Pick(rng, kSubjects);
  const std::string &modal = Pick(rng, kModals);
  if (question) {
    toks.push_back(modal);
    toks.push_back(subject);
  } else {
    toks.push_back(subject);
    toks.push_back(modal);
  }
  if (negate) toks.push_back(Pick(rng, kNegations));
  if (mid) toks.push_back(Pick(rng, kMidFillers));
  toks.push_back(Pick(rng, kVerbs));
  toks.push_back(Pick(rng, kDeterminers));
  toks.push_back(Pick(rng, kNouns));
  for (int k = 0; k < conj; ++k) {
    toks.push_back("and");
    toks.push_back(Pick(rng, kDeterminers));
    toks.push_back(Pick(rng, kNouns));
  }
  if (tail) toks.push_back(Pick(rng, kTails));
  toks.push_back(question ? "?" : ".");
  toks[0] = synth::Capitalize(toks[0]);
  return toks;
}

std::vector<int> Channel(Rng &rng, const SynthConfig &config,
                         const std::vector<std::string> &toks) {
  std::vector<int> input;
  input.reserve(toks.size() + 1);
  for (const auto &tok : toks) {
    int symbol = synth::CleanSymbol(tok);
    // Every draw is consumed unconditionally so the stream stays aligned
    // regardless of which branch fires.
    double u = rng.Uniform();
    if (synth::IsNegation(tok)) {
      if (u < config.negation_drop_rate) symbol = synth::kMumbleSymbol;
    } else if (synth::IsMidFiller(tok)) {
      if (u < synth::kFillerMumbleRate) symbol = synth::kMumbleSymbol;
    } else if (auto it = config.confusion_table.find(tok); it != config.confusion_table.end()) {
      double acc = 0;
      for (const auto &[alt, w] : it->second) {
        acc += w;
        if (u < acc) {
          symbol = synth::CleanSymbol(alt);
          break;
        }
      }
    }
    input.push_back(symbol);
  }
  input.push_back(synth::kEndSymbol);
  return input;
}

double RoundCentis(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

Corpus GenerateSyntheticCorpus(const SynthConfig &config) {
  config.Validate();
  Rng rng(config.seed);
  Corpus corpus;
  corpus.vocab = synth::LexiconVocabulary();
  corpus.source_vocab_size = corpus.vocab.size();
  int lo = std::max(config.min_len, synth::kShortestSentence);
  double clock = 0.0;
  std::string session;
  for (int r = 0; r < config.n_samples; ++r) {
    if (r % kSessionSize == 0) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "synth-%03d", r / kSessionSize);
      session = buf;
      clock = RoundCentis(rng.Uniform(0.0, 2.0));
    } else {
      clock = RoundCentis(clock + rng.Uniform(1.5, 6.0));
    }
    int words = lo + static_cast<int>(rng.Below(config.max_len - lo + 1));
    std::vector<std::string> toks = DrawSentence(rng, words);
    Sample s;
    char id[32];
    std::snprintf(id, sizeof(id), "utt%05d", r);
    s.id = id;
    s.input = Channel(rng, config, toks);
    s.reference = Detokenize(toks);
    s.ref_word_count = WhitespaceWordCount(s.reference);
    s.speaker = 1 + static_cast<int>(rng.Below(kSpeakers));
    s.start_s = clock;
    s.session = session;
    corpus.samples.push_back(std::move(s));
  }
  return corpus;
}

// ----------------------------------------------------------------- JSONL I/O

json SampleToJson(const Sample &s) {
  return {{"id", s.id},           {"input", s.input},     {"reference", s.reference},
          {"speaker", s.speaker}, {"start_s", s.start_s}, {"session", s.session}};
}

std::string CorpusToJsonl(const Corpus &corpus) {
  std::string out;
  for (const auto &s : corpus.samples) {
    out += SampleToJson(s).dump();
    out += '\n';
  }
  return out;
}

void SaveCorpus(const Corpus &corpus, const std::filesystem::path &path) {
  WriteFileAtomic(path, CorpusToJsonl(corpus));
}

namespace {

template <typename T>
T Field(const json &obj, const char *name, const std::string &where) {
  auto it = obj.find(name);
  if (it == obj.end()) Fail(ErrorCode::kParse, where + ": missing field \"" + name + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception &) {
    Fail(ErrorCode::kParse, where + ": field \"" + name + "\" has the wrong type");
  }
}

}  // namespace

Corpus ParseCorpusJsonl(const std::string &contents, const std::string &origin) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::vector<std::string> refs;
  int max_symbol = -1;
  size_t pos = 0;
  int line_no = 0;
  while (pos < contents.size()) {
    size_t nl = contents.find('\n', pos);
    if (nl == std::string::npos) nl = contents.size();
    std::string line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::string where = origin + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception &e) {
      Fail(ErrorCode::kParse, where + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) Fail(ErrorCode::kParse, where + ": expected a JSON object");
    Sample s;
    s.id = Field<std::string>(obj, "id", where);
    s.input = Field<std::vector<int>>(obj, "input", where);
    s.reference = Field<std::string>(obj, "reference", where);
    s.speaker = Field<int>(obj, "speaker", where);
    s.start_s = Field<double>(obj, "start_s", where);
    s.session = Field<std::string>(obj, "session", where);
    s.ref_word_count = WhitespaceWordCount(s.reference);
    if (s.input.empty()) Fail(ErrorCode::kParse, where + ": \"input\" is empty");
    for (int sym : s.input)
      if (sym < 0) Fail(ErrorCode::kParse, where + ": negative input symbol");
    if (s.ref_word_count < 1) Fail(ErrorCode::kParse, where + ": \"reference\" has no words");
    if (s.speaker < 0) Fail(ErrorCode::kParse, where + ": \"speaker\" is negative");
    if (s.start_s < 0) Fail(ErrorCode::kParse, where + ": \"start_s\" is negative");
    if (!seen.insert(s.id).second)
      Fail(ErrorCode::kParse, where + ": duplicate id \"" + s.id + "\"");
    max_symbol = std::max(max_symbol, *std::max_element(s.input.begin(), s.input.end()));
    refs.push_back(s.reference);
    corpus.samples.push_back(std::move(s));
  }
  corpus.source_vocab_size = std::max(1, max_symbol + 1);
  corpus.vocab = Vocabulary::FromTexts(refs);
  return corpus;
}

Corpus LoadCorpus(const std::filesystem::path &path) {
  if (!std::filesystem::exists(path))
    Fail(ErrorCode::kIo, "corpus file not found: " + path.string());
  return ParseCorpusJsonl(ReadFile(path), path.string());
}

Vocabulary MergedVocabulary(const std::vector<const Corpus *> &corpora) {
  std::vector<std::string> refs;
  for (const Corpus *c : corpora)
    for (const auto &s : c->samples) refs.push_back(s.reference);
  return Vocabulary::FromTexts(refs);
}

}  // namespace fcm
