// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_CORPUS_PAIRS_HPP
#define CHORUS_CORPUS_PAIRS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chorus/corpus/corpus.hpp"
#include "chorus/types.hpp"

namespace chorus::lm {
class LanguageModel;
}

namespace chorus::corpus {

enum class NegativeKind { kLmSample, kRandomEnding };

const char* to_string(NegativeKind kind);

// One discriminator training item: equal-length gold and negative
// continuation prefixes for a shared context.
struct RankingPair {
  TokenIds context;
  TokenIds gold;
  TokenIds negative;
  int prefix_length = 0;
  NegativeKind negative_kind = NegativeKind::kLmSample;
};

// Fractions of the gold continuation length used as prefix lengths, with a
// one-token minimum.
inline const std::vector<double> kDefaultPrefixFractions = {0.2, 0.4, 0.6,
                                                            0.8, 1.0};

// Emits one pair per (example, prefix length). lm-sample negatives are
// continuations sampled from the language model conditioned on the example's
// context, with the termination symbol excluded so lengths match the gold
// prefix exactly. random-ending negatives are drawn uniformly from other
// examples' continuations.
std::vector<RankingPair> make_ranking_pairs(
    const std::vector<Example>& examples, NegativeKind kind,
    const lm::LanguageModel* model, const Vocabulary& vocab,
    const std::vector<double>& prefix_fractions, std::uint64_t seed,
    double sample_temperature = 1.0);

void save_ranking_pairs(const std::string& path,
                        const std::vector<RankingPair>& pairs,
                        std::uint64_t config_hash, std::uint64_t seed,
                        std::uint64_t vocab_hash);

}  // namespace chorus::corpus

#endif  // CHORUS_CORPUS_PAIRS_HPP
