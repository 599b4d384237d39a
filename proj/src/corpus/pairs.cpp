// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/corpus/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "chorus/lm/model.hpp"
#include "chorus/rng.hpp"

namespace chorus::corpus {

const char* to_string(NegativeKind kind) {
  return kind == NegativeKind::kLmSample ? "lm-sample" : "random-ending";
}

namespace {

int prefix_tokens(double fraction, int gold_len) {
  return std::max(1, static_cast<int>(std::llround(fraction * gold_len)));
}

TokenIds truncated(const TokenIds& seq, int len) {
  return TokenIds(seq.begin(), seq.begin() + len);
}

// Uniform draw of another example's ending with at least `len` tokens;
// endings that are still too short are extended by repeating their last
// token.
TokenIds random_ending(const std::vector<TokenIds>& endings, int self, int len,
                       Rng& rng) {
  std::vector<int> candidates;
  for (int j = 0; j < static_cast<int>(endings.size()); ++j) {
    if (j != self &&
        static_cast<int>(endings[static_cast<std::size_t>(j)].size()) >= len)
      candidates.push_back(j);
  }
  int pick;
  if (!candidates.empty()) {
    pick = candidates[static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(candidates.size())))];
  } else {
    pick = rng.uniform_int(static_cast<int>(endings.size()));
    if (pick == self) pick = (pick + 1) % static_cast<int>(endings.size());
  }
  TokenIds out = endings[static_cast<std::size_t>(pick)];
  while (static_cast<int>(out.size()) < len) out.push_back(out.back());
  out.resize(static_cast<std::size_t>(len));
  return out;
}

}  // namespace

std::vector<RankingPair> make_ranking_pairs(
    const std::vector<Example>& examples, NegativeKind kind,
    const lm::LanguageModel* model, const Vocabulary& vocab,
    const std::vector<double>& prefix_fractions, std::uint64_t seed,
    double sample_temperature) {
  if (kind == NegativeKind::kLmSample && (model == nullptr || !model->trained()))
    throw std::invalid_argument(
        "lm-sample negatives require a trained language model");
  if (kind == NegativeKind::kRandomEnding && examples.size() < 2)
    throw std::invalid_argument(
        "random-ending negatives require at least two examples");
  if (prefix_fractions.empty())
    throw std::invalid_argument("empty prefix-length set");

  std::vector<TokenIds> contexts, endings;
  contexts.reserve(examples.size());
  endings.reserve(examples.size());
  for (const auto& ex : examples) {
    contexts.push_back(vocab.encode(ex.context));
    endings.push_back(vocab.encode(ex.continuation));
  }

  const std::vector<TokenId> banned = {Vocabulary::kTerm, Vocabulary::kPad,
                                       Vocabulary::kBos};

  std::vector<RankingPair> pairs;
  pairs.reserve(examples.size() * prefix_fractions.size());
  for (int i = 0; i < static_cast<int>(examples.size()); ++i) {
    const auto& gold = endings[static_cast<std::size_t>(i)];
    const int gold_len = static_cast<int>(gold.size());
    if (gold_len == 0) continue;

    TokenIds lm_sample;
    if (kind == NegativeKind::kLmSample) {
      lm_sample = model->sample_continuation(
          contexts[static_cast<std::size_t>(i)], gold_len, sample_temperature,
          derive_seed(seed, 0x9a12, static_cast<std::uint64_t>(i)), banned);
    }

    for (std::size_t f = 0; f < prefix_fractions.size(); ++f) {
      const int len = std::min(gold_len, prefix_tokens(prefix_fractions[f],
                                                       gold_len));
      RankingPair pair;
      pair.context = contexts[static_cast<std::size_t>(i)];
      pair.gold = truncated(gold, len);
      pair.prefix_length = len;
      pair.negative_kind = kind;
      if (kind == NegativeKind::kLmSample) {
        pair.negative = truncated(lm_sample, len);
      } else {
        Rng rng(derive_seed(seed, 0x4e11,
                            static_cast<std::uint64_t>(i) * 131 + f));
        pair.negative = random_ending(endings, i, len, rng);
      }
      pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

void save_ranking_pairs(const std::string& path,
                        const std::vector<RankingPair>& pairs,
                        std::uint64_t config_hash, std::uint64_t seed,
                        std::uint64_t vocab_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write ranking pairs: " + path);
  nlohmann::ordered_json header;
  header["format_version"] = 1;
  header["kind"] = "ranking_pairs";
  header["count"] = pairs.size();
  header["config_hash"] = config_hash;
  header["seed"] = seed;
  header["vocab_hash"] = vocab_hash;
  out << header.dump() << "\n";
  for (const auto& p : pairs) {
    nlohmann::ordered_json rec;
    rec["context"] = p.context;
    rec["gold"] = p.gold;
    rec["negative"] = p.negative;
    rec["prefix_length"] = p.prefix_length;
    rec["negative_kind"] = to_string(p.negative_kind);
    out << rec.dump() << "\n";
  }
}

}  // namespace chorus::corpus
