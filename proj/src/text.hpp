// src/text.hpp

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

#ifndef FCM_TEXT_HPP_
#define FCM_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace fcm {

/// Normalization used for WER scoring and the proxy scorers.
///
/// Rules, applied in order:
///   1. ASCII letters are lowercased; other bytes pass through.
///   2. Underscores are deleted ("X_M_L_" -> "xml").
///   3. The characters . , ? ! ; : " ( ) and '-' become word breaks.
///   4. Text is split on whitespace; apostrophes are kept only when they sit
///      inside a word ("don't" stays, "'quoted'" loses both).
///   5. Empty tokens are dropped.
std::vector<std::string> NormalizeText(std::string_view text);

/// Whitespace-delimited word count, punctuation attached to words included.
int WhitespaceWordCount(std::string_view text);

/// Splits raw text into output tokens: whitespace words with leading '(' '"'
/// and trailing . , ? ! ; : " ) peeled off as separate tokens. Case and
/// intra-word characters are preserved.
std::vector<std::string> TokenizeForModel(std::string_view text);

/// Inverse rendering of TokenizeForModel: single spaces between tokens, no
/// space before closing punctuation and none after an opening parenthesis.
std::string Detokenize(const std::vector<std::string> &tokens);

std::string Join(const std::vector<std::string> &parts, std::string_view sep);

}  // namespace fcm

#endif  // FCM_TEXT_HPP_
