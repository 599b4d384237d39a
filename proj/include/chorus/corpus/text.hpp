// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_CORPUS_TEXT_HPP
#define CHORUS_CORPUS_TEXT_HPP

#include <string>
#include <vector>

#include "chorus/types.hpp"

namespace chorus::corpus {

// Whitespace-plus-punctuation tokenization. ASCII punctuation becomes a
// standalone token; multi-byte UTF-8 sequences pass through as word
// characters.
struct RawToken {
  std::string text;
  bool space_after;  // followed by whitespace (or end of input) in the raw text
};

std::vector<RawToken> tokenize_raw(const std::string& text, bool lowercase);

Tokens tokenize(const std::string& text, bool lowercase = false);

bool is_sentence_terminator(const std::string& token);

// Splits text into sentences, each a token sequence. A sentence ends at a
// {., !, ?} token that was followed by whitespace in the raw text, unless the
// preceding token is a known abbreviation. Trailing terminator-less text
// forms one final sentence. Concatenating the result reproduces
// tokenize(text, lowercase).
std::vector<Tokens> segment_sentences(const std::string& text,
                                      bool lowercase = false);

// Spans of complete sentences in an already-tokenized sequence: [begin, end)
// pairs where tokens[end - 1] is a terminator. Trailing tokens after the last
// terminator are not covered.
std::vector<std::pair<int, int>> complete_sentence_spans(
    const Tokens& tokens);

}  // namespace chorus::corpus

#endif  // CHORUS_CORPUS_TEXT_HPP
