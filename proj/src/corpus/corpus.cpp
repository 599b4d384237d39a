// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/corpus/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "chorus/corpus/text.hpp"
#include "chorus/rng.hpp"

namespace chorus::corpus {

CorpusMode corpus_mode_from_string(const std::string& s) {
  if (s == "review") return CorpusMode::kReview;
  if (s == "book") return CorpusMode::kBook;
  throw std::invalid_argument("unknown corpus mode: " + s);
}

const char* to_string(CorpusMode mode) {
  return mode == CorpusMode::kReview ? "review" : "book";
}

namespace {

Example make_example(const std::vector<Tokens>& sentences, int first) {
  Example ex;
  auto fill = [&](Tokens& tokens, std::vector<std::pair<int, int>>& spans,
                  int begin, int count) {
    for (int s = begin; s < begin + count; ++s) {
      const auto& sent = sentences[static_cast<std::size_t>(s)];
      const int at = static_cast<int>(tokens.size());
      tokens.insert(tokens.end(), sent.begin(), sent.end());
      spans.emplace_back(at, at + static_cast<int>(sent.size()));
    }
  };
  fill(ex.context, ex.context_spans, first, kContextSentences);
  fill(ex.continuation, ex.continuation_spans, first + kContextSentences,
       kContinuationSentences);
  return ex;
}

}  // namespace

BuildExamplesResult build_examples(const std::vector<Document>& documents,
                                   CorpusMode mode) {
  constexpr int kSegment = kContextSentences + kContinuationSentences;
  BuildExamplesResult result;
  for (const auto& doc : documents) {
    const auto sentences = segment_sentences(doc.text, /*lowercase=*/true);
    const int n = static_cast<int>(sentences.size());
    if (n < kSegment) {
      ++result.skipped_documents;
      continue;
    }
    if (mode == CorpusMode::kReview) {
      result.examples.push_back(make_example(sentences, 0));
    } else {
      for (int at = 0; at + kSegment <= n; at += kSegment)
        result.examples.push_back(make_example(sentences, at));
    }
  }
  return result;
}

std::vector<Document> read_documents(const std::string& path,
                                     CorpusMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read corpus file: " + path);
  std::vector<Document> docs;
  std::string line;
  if (mode == CorpusMode::kReview) {
    int n = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      docs.push_back({"doc" + std::to_string(n++), line});
    }
  } else {
    std::string current;
    int n = 0;
    auto flush = [&]() {
      if (!current.empty()) {
        docs.push_back({"doc" + std::to_string(n++), current});
        current.clear();
      }
    };
    while (std::getline(in, line)) {
      if (line.empty()) {
        flush();
      } else {
        if (!current.empty()) current += ' ';
        current += line;
      }
    }
    flush();
  }
  return docs;
}

std::map<std::string, std::int64_t> count_tokens(
    const std::vector<Example>& examples) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& ex : examples) {
    for (const auto& t : ex.context) ++counts[t];
    for (const auto& t : ex.continuation) ++counts[t];
  }
  return counts;
}

Vocabulary build_vocabulary(const std::vector<Example>& examples,
                            int max_size) {
  if (examples.empty())
    throw std::invalid_argument("cannot build a vocabulary from no examples");
  return Vocabulary::build(count_tokens(examples), max_size);
}

CorpusSplit split_examples(const std::vector<Example>& examples,
                           std::uint64_t seed) {
  std::vector<int> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x5711));
  rng.shuffle(order);

  const int n = static_cast<int>(examples.size());
  const int held = n / 5;
  // Held-out portions: half test, a quarter scorer training, and an eighth
  // each for validation and mixture-weight training.
  const int n_test = held / 2;
  const int n_valid = held / 8;
  const int n_weight = held / 8;

  CorpusSplit split;
  auto take = [&](std::vector<Example>& dst, int begin, int count) {
    for (int i = begin; i < begin + count; ++i)
      dst.push_back(examples[static_cast<std::size_t>(
          order[static_cast<std::size_t>(i)])]);
  };
  take(split.test, 0, n_test);
  take(split.validation, n_test, n_valid);
  take(split.weight_train, n_test + n_valid, n_weight);
  take(split.scorer_train, n_test + n_valid + n_weight,
       held - n_test - n_valid - n_weight);
  take(split.lm_train, held, n - held);
  return split;
}

TokenIds lm_token_stream(const std::vector<Example>& examples,
                         const Vocabulary& vocab) {
  TokenIds stream;
  for (const auto& ex : examples) {
    for (const auto& t : ex.context) stream.push_back(vocab.id_of(t));
    for (const auto& t : ex.continuation) stream.push_back(vocab.id_of(t));
    stream.push_back(Vocabulary::kTerm);
  }
  return stream;
}

namespace {

nlohmann::ordered_json spans_to_json(
    const std::vector<std::pair<int, int>>& spans) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (auto& [b, e] : spans) arr.push_back({b, e});
  return arr;
}

std::vector<std::pair<int, int>> spans_from_json(const nlohmann::json& arr) {
  std::vector<std::pair<int, int>> spans;
  for (const auto& s : arr) spans.emplace_back(s[0].get<int>(), s[1].get<int>());
  return spans;
}

}  // namespace

void save_examples(const std::string& path, const std::vector<Example>& exs,
                   std::uint64_t config_hash, std::uint64_t seed,
                   std::uint64_t vocab_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write examples: " + path);
  nlohmann::ordered_json header;
  header["format_version"] = 1;
  header["kind"] = "examples";
  header["count"] = exs.size();
  header["config_hash"] = config_hash;
  header["seed"] = seed;
  header["vocab_hash"] = vocab_hash;
  out << header.dump() << "\n";
  for (const auto& ex : exs) {
    nlohmann::ordered_json rec;
    rec["context"] = ex.context;
    rec["continuation"] = ex.continuation;
    rec["spans"] = {{"context", spans_to_json(ex.context_spans)},
                    {"continuation", spans_to_json(ex.continuation_spans)}};
    out << rec.dump() << "\n";
  }
}

std::vector<Example> load_examples(const std::string& path,
                                   std::uint64_t* vocab_hash_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read examples: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty examples file: " + path);
  const auto header = nlohmann::json::parse(line);
  if (header.at("kind") != "examples")
    throw std::runtime_error("not an examples file: " + path);
  if (vocab_hash_out)
    *vocab_hash_out = header.at("vocab_hash").get<std::uint64_t>();

  std::vector<Example> exs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    Example ex;
    ex.context = rec.at("context").get<Tokens>();
    ex.continuation = rec.at("continuation").get<Tokens>();
    ex.context_spans = spans_from_json(rec.at("spans").at("context"));
    ex.continuation_spans = spans_from_json(rec.at("spans").at("continuation"));
    exs.push_back(std::move(ex));
  }
  return exs;
}

}  // namespace chorus::corpus
