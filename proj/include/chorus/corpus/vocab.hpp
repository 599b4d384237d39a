// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_CORPUS_VOCAB_HPP
#define CHORUS_CORPUS_VOCAB_HPP

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "chorus/types.hpp"

namespace chorus::corpus {

// Token/id mapping with reserved specials at the lowest ids. Lookup is
// total: unseen tokens map to unk.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kBos = 2;
  static constexpr TokenId kTerm = 3;  // end-of-document symbol
  static constexpr int kNumSpecials = 4;

  static const char* pad_token() { return "<pad>"; }
  static const char* unk_token() { return "<unk>"; }
  static const char* bos_token() { return "<s>"; }
  static const char* term_token() { return "</s>"; }

  Vocabulary() = default;

  // Keeps the (max_size - specials) most frequent tokens; ties broken
  // lexicographically. Throws std::invalid_argument when max_size leaves no
  // room for any regular token.
  static Vocabulary build(const std::map<std::string, std::int64_t>& counts,
                          int max_size);

  TokenId id_of(const std::string& token) const;
  const std::string& token_of(TokenId id) const;
  bool contains(const std::string& token) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  std::int64_t frequency(const std::string& token) const;

  TokenIds encode(const Tokens& tokens) const;
  Tokens decode(const TokenIds& ids) const;

  // Ids of in-vocabulary sentence terminators {., !, ?}.
  std::vector<TokenId> terminator_ids() const;
  bool is_terminator(TokenId id) const;

  // FNV-1a over the id-ordered token list; used to pair checkpoints with the
  // vocabulary that produced them.
  std::uint64_t hash() const;

  // First line is a JSON header, then one token per line ordered by id.
  void save(const std::string& path, std::uint64_t config_hash,
            std::uint64_t seed) const;
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::unordered_map<std::string, std::int64_t> freq_;

  void index_specials_and(const std::vector<std::string>& regular);
};

}  // namespace chorus::corpus

#endif  // CHORUS_CORPUS_VOCAB_HPP
