// src/corpus.hpp

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

#ifndef FCM_CORPUS_HPP_
#define FCM_CORPUS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

namespace fcm {

/// Output token inventory. Index 0 is always BOS and index 1 always EOS.
class Vocabulary {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr const char *kBosToken = "<s>";
  static constexpr const char *kEosToken = "</s>";

  Vocabulary();
  // tokens[0] must be "<s>", tokens[1] "</s>", and no token may repeat.
  explicit Vocabulary(std::vector<std::string> tokens);

  // BOS, EOS, then the sorted union of all model tokens of `texts`.
  static Vocabulary FromTexts(const std::vector<std::string> &texts);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string &token(int id) const { return tokens_.at(id); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  std::optional<int> Find(const std::string &token) const;

  // Token ids of a raw text (no BOS/EOS). Throws kOutOfRange on unknown tokens.
  std::vector<int> Encode(const std::string &text) const;
  // Detokenized rendering; BOS/EOS ids are skipped.
  std::string Render(const std::vector<int> &ids) const;

  bool operator==(const Vocabulary &o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct Sample {
  std::string id;
  std::vector<int> input;  // source symbols, the stand-in for audio
  std::string reference;   // cased, punctuated transcript
  int ref_word_count = 0;  // whitespace word count of reference
  int speaker = 0;         // mic index
  double start_s = 0.0;
  std::string session;

  bool operator==(const Sample &o) const = default;
};

struct Corpus {
  std::vector<Sample> samples;
  int source_vocab_size = 1;
  Vocabulary vocab;

  size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  // Samples [begin, end) sharing this corpus's vocabularies.
  Corpus Slice(size_t begin, size_t end) const;
};

struct SynthConfig {
  int n_samples = 1000;
  uint64_t seed = 7;
  int min_len = 5;
  int max_len = 10;
  // content token -> (confusable token, probability of emitting its symbol)
  std::map<std::string, std::vector<std::pair<std::string, double>>>
      confusion_table;
  double negation_drop_rate = 0.75;
  double content_weight = 3.0;
  double filler_weight = 0.3;

  // Default confusion table over the built-in lexicon.
  static SynthConfig Defaults();
  // Throws kInvalidArgument naming the violated bound.
  void Validate() const;

  static SynthConfig FromJson(const nlohmann::json &j);
  nlohmann::json ToJson() const;
};

/// Facts about the built-in lexicon the generator draws from.
namespace synth {

constexpr int kEndSymbol = 0;     // appended to every synthetic input
constexpr int kMumbleSymbol = 1;  // weakened negation or reduced mid-sentence filler
constexpr int kShortestSentence = 5;
constexpr double kFillerMumbleRate = 0.75;
constexpr double kNegationSlotRate = 0.55;  // else the slot holds a filler

// Full token inventory: BOS, EOS, sorted lexicon tokens.
const Vocabulary &LexiconVocabulary();
bool IsNegation(const std::string &token);
bool IsFiller(const std::string &token);
bool IsMidFiller(const std::string &token);  // the fillers that may be mumbled
bool IsContent(const std::string &token);
// Clean symbol for a token: its vocabulary id (ids >= 2 never collide with
// the END and MUMBLE symbols).
int CleanSymbol(const std::string &token);

}  // namespace synth

Corpus GenerateSyntheticCorpus(const SynthConfig &config);

/// Reads the JSONL corpus format. ref_word_count is recomputed; the
/// vocabulary is derived from the references and source_vocab_size is one
/// past the largest input symbol.
Corpus LoadCorpus(const std::filesystem::path &path);
Corpus ParseCorpusJsonl(const std::string &contents, const std::string &origin);

nlohmann::json SampleToJson(const Sample &s);
std::string CorpusToJsonl(const Corpus &corpus);
void SaveCorpus(const Corpus &corpus, const std::filesystem::path &path);

/// Vocabulary covering every reference of every corpus given.
Vocabulary MergedVocabulary(const std::vector<const Corpus *> &corpora);

}  // namespace fcm

#endif  // FCM_CORPUS_HPP_
