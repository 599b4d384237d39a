// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_CORPUS_NLI_GEN_HPP
#define CHORUS_CORPUS_NLI_GEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chorus/corpus/vocab.hpp"
#include "chorus/types.hpp"

namespace chorus::corpus {

enum class NliLabel { kContradiction = 0, kEntailment = 1, kNeutral = 2 };

const char* to_string(NliLabel label);

struct NliTriple {
  TokenIds premise;
  TokenIds hypothesis;
  NliLabel label;
};

// Deterministic templated sentence-pair generator over the vocabulary's own
// tokens. Entailment drops a modifier from the premise, contradiction swaps
// the modifier with its paired opposite, and neutral draws from a disjoint
// token bank. Labels are balanced within one.
std::vector<NliTriple> generate_synthetic_nli(const Vocabulary& vocab, int n,
                                              std::uint64_t seed);

void save_nli_triples(const std::string& path,
                      const std::vector<NliTriple>& triples,
                      std::uint64_t config_hash, std::uint64_t seed,
                      std::uint64_t vocab_hash);

}  // namespace chorus::corpus

#endif  // CHORUS_CORPUS_NLI_GEN_HPP
