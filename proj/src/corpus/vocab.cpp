// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/corpus/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "chorus/corpus/text.hpp"

namespace chorus::corpus {

void Vocabulary::index_specials_and(const std::vector<std::string>& regular) {
  tokens_ = {pad_token(), unk_token(), bos_token(), term_token()};
  tokens_.insert(tokens_.end(), regular.begin(), regular.end());
  ids_.clear();
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    ids_[tokens_[i]] = static_cast<TokenId>(i);
}

Vocabulary Vocabulary::build(const std::map<std::string, std::int64_t>& counts,
                             int max_size) {
  if (max_size < kNumSpecials + 1) {
    throw std::invalid_argument(
        "vocabulary max_size must leave room for at least one regular token");
  }
  std::vector<std::pair<std::string, std::int64_t>> entries(counts.begin(),
                                                            counts.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::size_t room = static_cast<std::size_t>(max_size - kNumSpecials);
  if (entries.size() > room) entries.resize(room);

  Vocabulary v;
  std::vector<std::string> regular;
  regular.reserve(entries.size());
  for (auto& [tok, n] : entries) {
    regular.push_back(tok);
    v.freq_[tok] = n;
  }
  v.index_specials_and(regular);
  return v;
}

TokenId Vocabulary::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token_of(TokenId id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("token id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(const std::string& token) const {
  return ids_.count(token) > 0;
}

std::int64_t Vocabulary::frequency(const std::string& token) const {
  auto it = freq_.find(token);
  return it == freq_.end() ? 0 : it->second;
}

TokenIds Vocabulary::encode(const Tokens& tokens) const {
  TokenIds out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id_of(t));
  return out;
}

Tokens Vocabulary::decode(const TokenIds& ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(token_of(id));
  return out;
}

std::vector<TokenId> Vocabulary::terminator_ids() const {
  std::vector<TokenId> out;
  for (const char* t : {".", "!", "?"}) {
    auto it = ids_.find(t);
    if (it != ids_.end()) out.push_back(it->second);
  }
  return out;
}

bool Vocabulary::is_terminator(TokenId id) const {
  if (id < 0 || id >= size()) return false;
  return is_sentence_terminator(tokens_[static_cast<std::size_t>(id)]);
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& t : tokens_) {
    for (unsigned char c : t) mix(c);
    mix('\n');
  }
  return h;
}

void Vocabulary::save(const std::string& path, std::uint64_t config_hash,
                      std::uint64_t seed) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
  nlohmann::ordered_json header;
  header["format_version"] = 1;
  header["kind"] = "vocabulary";
  header["size"] = size();
  header["config_hash"] = config_hash;
  header["seed"] = seed;
  header["vocab_hash"] = hash();
  out << header.dump() << "\n";
  for (const auto& t : tokens_) out << t << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read vocabulary: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty vocabulary file: " + path);
  const auto header = nlohmann::json::parse(line);
  if (header.at("kind") != "vocabulary")
    throw std::runtime_error("not a vocabulary file: " + path);

  std::vector<std::string> all;
  while (std::getline(in, line)) all.push_back(line);
  if (static_cast<int>(all.size()) < kNumSpecials)
    throw std::runtime_error("truncated vocabulary file: " + path);

  Vocabulary v;
  v.index_specials_and(
      {all.begin() + kNumSpecials, all.end()});  // specials re-derived
  if (v.hash() != header.at("vocab_hash").get<std::uint64_t>())
    throw std::runtime_error("vocabulary hash mismatch: " + path);
  return v;
}

}  // namespace chorus::corpus
