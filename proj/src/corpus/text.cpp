// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/corpus/text.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace chorus::corpus {

namespace {

bool is_punct_char(unsigned char c) {
  static const std::string punct = ".,!?;:\"'()[]{}<>-/&*+=~`@#$%^_|\\";
  return punct.find(static_cast<char>(c)) != std::string::npos;
}

const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> abbr = {
      "mr", "mrs", "ms", "dr", "st", "prof", "sr", "jr", "vs", "no", "etc"};
  return abbr;
}

}  // namespace

std::vector<RawToken> tokenize_raw(const std::string& text, bool lowercase) {
  std::vector<RawToken> out;
  std::string current;
  auto flush = [&](bool space_next) {
    if (!current.empty()) {
      out.push_back({current, space_next});
      current.clear();
    } else if (space_next && !out.empty()) {
      out.back().space_after = true;
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      flush(true);
    } else if (c < 0x80 && is_punct_char(c)) {
      flush(false);
      current.push_back(static_cast<char>(c));
      flush(false);
    } else {
      current.push_back(lowercase && c < 0x80
                            ? static_cast<char>(std::tolower(c))
                            : static_cast<char>(c));
    }
  }
  flush(true);
  if (!out.empty()) out.back().space_after = true;  // end of input counts
  return out;
}

Tokens tokenize(const std::string& text, bool lowercase) {
  Tokens out;
  for (auto& t : tokenize_raw(text, lowercase)) out.push_back(t.text);
  return out;
}

bool is_sentence_terminator(const std::string& token) {
  return token == "." || token == "!" || token == "?";
}

std::vector<Tokens> segment_sentences(const std::string& text,
                                      bool lowercase) {
  const auto raw = tokenize_raw(text, lowercase);
  std::vector<Tokens> sentences;
  Tokens current;
  std::string prev_lower;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    current.push_back(raw[i].text);
    bool boundary = is_sentence_terminator(raw[i].text) && raw[i].space_after;
    if (boundary && raw[i].text == "." && abbreviations().count(prev_lower)) {
      boundary = false;
    }
    if (boundary) {
      sentences.push_back(std::move(current));
      current.clear();
    }
    prev_lower = raw[i].text;
    for (auto& ch : prev_lower)
      ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

std::vector<std::pair<int, int>> complete_sentence_spans(const Tokens& tokens) {
  std::vector<std::pair<int, int>> spans;
  int begin = 0;
  for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
    if (is_sentence_terminator(tokens[static_cast<std::size_t>(i)])) {
      spans.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  return spans;
}

}  // namespace chorus::corpus
