// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/corpus/nli_gen.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "chorus/rng.hpp"

namespace chorus::corpus {

const char* to_string(NliLabel label) {
  switch (label) {
    case NliLabel::kContradiction:
      return "contradiction";
    case NliLabel::kEntailment:
      return "entailment";
    case NliLabel::kNeutral:
      return "neutral";
  }
  return "unknown";
}

namespace {

bool is_wordlike(const std::string& token) {
  for (unsigned char c : token)
    if (c < 0x80 && !std::isalpha(c)) return false;
  return !token.empty();
}

struct WordBanks {
  // Modifier pairs (2i, 2i + 1) act as opposites; the neutral bank is
  // disjoint from the others.
  std::vector<TokenId> modifiers;
  std::vector<TokenId> subjects;
  std::vector<TokenId> verbs;
  std::vector<TokenId> objects;
  std::vector<TokenId> neutral;
};

WordBanks make_banks(const Vocabulary& vocab) {
  std::vector<TokenId> usable;
  for (TokenId id = Vocabulary::kNumSpecials; id < vocab.size(); ++id) {
    if (is_wordlike(vocab.token_of(id))) usable.push_back(id);
  }
  if (usable.size() < 8)
    throw std::invalid_argument(
        "vocabulary too small for synthetic NLI generation");
  // Ids are frequency-ordered; cycle through them so small vocabularies
  // still fill every bank.
  auto take = [&, at = std::size_t(0)](std::size_t n) mutable {
    std::vector<TokenId> out;
    for (std::size_t i = 0; i < n; ++i, ++at)
      out.push_back(usable[at % usable.size()]);
    return out;
  };
  WordBanks banks;
  banks.modifiers = take(8);
  banks.subjects = take(8);
  banks.verbs = take(4);
  banks.objects = take(8);
  banks.neutral = take(10);
  return banks;
}

}  // namespace

std::vector<NliTriple> generate_synthetic_nli(const Vocabulary& vocab, int n,
                                              std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("need n >= 3 for balanced labels");
  const WordBanks banks = make_banks(vocab);
  const bool with_period = vocab.contains(".");
  const TokenId period = vocab.id_of(".");
  Rng rng(seed);

  auto pick = [&](const std::vector<TokenId>& bank) {
    return bank[static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(bank.size())))];
  };

  std::vector<NliTriple> triples;
  triples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int mod_index = rng.uniform_int(
        static_cast<int>(banks.modifiers.size()));
    const TokenId modifier =
        banks.modifiers[static_cast<std::size_t>(mod_index)];
    const TokenId opposite =
        banks.modifiers[static_cast<std::size_t>(mod_index ^ 1)];
    const TokenId subject = pick(banks.subjects);
    const TokenId verb = pick(banks.verbs);
    const TokenId object = pick(banks.objects);

    NliTriple triple;
    triple.premise = {modifier, subject, verb, object};
    triple.label = static_cast<NliLabel>(i % 3);
    switch (triple.label) {
      case NliLabel::kEntailment:
        triple.hypothesis = {subject, verb, object};
        break;
      case NliLabel::kContradiction:
        triple.hypothesis = {opposite, subject, verb, object};
        break;
      case NliLabel::kNeutral:
        triple.hypothesis = {pick(banks.neutral), pick(banks.neutral),
                             pick(banks.neutral)};
        break;
    }
    if (with_period) {
      triple.premise.push_back(period);
      triple.hypothesis.push_back(period);
    }
    triples.push_back(std::move(triple));
  }
  return triples;
}

void save_nli_triples(const std::string& path,
                      const std::vector<NliTriple>& triples,
                      std::uint64_t config_hash, std::uint64_t seed,
                      std::uint64_t vocab_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write NLI triples: " + path);
  nlohmann::ordered_json header;
  header["format_version"] = 1;
  header["kind"] = "nli_triples";
  header["count"] = triples.size();
  header["config_hash"] = config_hash;
  header["seed"] = seed;
  header["vocab_hash"] = vocab_hash;
  out << header.dump() << "\n";
  for (const auto& t : triples) {
    nlohmann::ordered_json rec;
    rec["premise"] = t.premise;
    rec["hypothesis"] = t.hypothesis;
    rec["label"] = to_string(t.label);
    out << rec.dump() << "\n";
  }
}

}  // namespace chorus::corpus
