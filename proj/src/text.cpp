// src/text.cpp

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

#include "text.hpp"

#include <cctype>

namespace fcm {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsBreakPunct(char c) {
  switch (c) {
    case '.': case ',': case '?': case '!': case ';': case ':':
    case '"': case '(': case ')': case '-':
      return true;
    default:
      return false;
  }
}

bool IsClosingPunct(char c) {
  switch (c) {
    case '.': case ',': case '?': case '!': case ';': case ':':
    case '"': case ')':
      return true;
    default:
      return false;
  }
}

bool IsClosingToken(const std::string &tok) {
  return tok.size() == 1 && IsClosingPunct(tok[0]) && tok[0] != '"';
}

std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (IsSpace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::vector<std::string> NormalizeText(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    if (c == '_') continue;
    if (IsBreakPunct(c)) {
      cleaned.push_back(' ');
      continue;
    }
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc < 0x80) c = static_cast<char>(std::tolower(uc));
    cleaned.push_back(c);
  }
  std::vector<std::string> out;
  for (std::string &word : SplitWhitespace(cleaned)) {
    size_t b = 0, e = word.size();
    while (b < e && word[b] == '\'') ++b;
    while (e > b && word[e - 1] == '\'') --e;
    if (b < e) out.push_back(word.substr(b, e - b));
  }
  return out;
}

int WhitespaceWordCount(std::string_view text) {
  return static_cast<int>(SplitWhitespace(text).size());
}

std::vector<std::string> TokenizeForModel(std::string_view text) {
  std::vector<std::string> out;
  for (const std::string &word : SplitWhitespace(text)) {
    size_t b = 0, e = word.size();
    std::vector<std::string> tail;
    while (b < e && (word[b] == '(' || word[b] == '"')) {
      out.emplace_back(1, word[b]);
      ++b;
    }
    while (e > b && IsClosingPunct(word[e - 1])) {
      tail.emplace_back(1, word[e - 1]);
      --e;
    }
    if (b < e) out.push_back(word.substr(b, e - b));
    out.insert(out.end(), tail.rbegin(), tail.rend());
  }
  return out;
}

std::string Detokenize(const std::vector<std::string> &tokens) {
  std::string out;
  bool after_open = false;
  for (size_t k = 0; k < tokens.size(); ++k) {
    const std::string &tok = tokens[k];
    if (k > 0 && !IsClosingToken(tok) && !after_open) out.push_back(' ');
    out += tok;
    after_open = (tok == "(");
  }
  return out;
}

std::string Join(const std::vector<std::string> &parts, std::string_view sep) {
  std::string out;
  for (size_t k = 0; k < parts.size(); ++k) {
    if (k) out += sep;
    out += parts[k];
  }
  return out;
}

}  // namespace fcm
