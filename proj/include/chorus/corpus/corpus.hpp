// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_CORPUS_CORPUS_HPP
#define CHORUS_CORPUS_CORPUS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chorus/corpus/vocab.hpp"
#include "chorus/types.hpp"

namespace chorus::corpus {

struct Document {
  std::string id;
  std::string text;
};

enum class CorpusMode { kReview, kBook };

CorpusMode corpus_mode_from_string(const std::string& s);
const char* to_string(CorpusMode mode);

// A (context, continuation) pair of 5 + 5 complete sentences. Tokens are
// lowercased strings; spans are [begin, end) offsets tiling each side.
struct Example {
  Tokens context;
  Tokens continuation;
  std::vector<std::pair<int, int>> context_spans;
  std::vector<std::pair<int, int>> continuation_spans;
};

struct BuildExamplesResult {
  std::vector<Example> examples;
  int skipped_documents = 0;
};

inline constexpr int kContextSentences = 5;
inline constexpr int kContinuationSentences = 5;

// Review mode: at most one example per document, from its first 10
// sentences, requiring at least 10. Book mode: consecutive non-overlapping
// 10-sentence segments, remainder dropped.
BuildExamplesResult build_examples(const std::vector<Document>& documents,
                                   CorpusMode mode);

// One document per line (review) or blank-line-separated documents (book).
std::vector<Document> read_documents(const std::string& path, CorpusMode mode);

std::map<std::string, std::int64_t> count_tokens(
    const std::vector<Example>& examples);

Vocabulary build_vocabulary(const std::vector<Example>& examples,
                            int max_size);

// Split mirroring the held-out protocol: 80% trains the language model; the
// held-out 20% is divided into test / validation / mixture-weight / scorer
// portions. Deterministic given seed.
struct CorpusSplit {
  std::vector<Example> lm_train;
  std::vector<Example> scorer_train;
  std::vector<Example> weight_train;
  std::vector<Example> validation;
  std::vector<Example> test;
};

CorpusSplit split_examples(const std::vector<Example>& examples,
                           std::uint64_t seed);

// Concatenated token-id stream for LM training: tokens of each example
// followed by the termination symbol.
TokenIds lm_token_stream(const std::vector<Example>& examples,
                         const Vocabulary& vocab);

// JSONL round trip for example files; the first line is a header record.
void save_examples(const std::string& path, const std::vector<Example>& exs,
                   std::uint64_t config_hash, std::uint64_t seed,
                   std::uint64_t vocab_hash);
std::vector<Example> load_examples(const std::string& path,
                                   std::uint64_t* vocab_hash_out = nullptr);

}  // namespace chorus::corpus

#endif  // CHORUS_CORPUS_CORPUS_HPP
