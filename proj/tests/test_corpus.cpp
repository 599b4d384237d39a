// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "chorus/corpus/corpus.hpp"
#include "chorus/corpus/nli_gen.hpp"
#include "chorus/corpus/pairs.hpp"
#include "chorus/corpus/text.hpp"
#include "chorus/lm/model.hpp"
#include "chorus/lm/train.hpp"

using namespace chorus;
using corpus::CorpusMode;
using corpus::Document;
using corpus::Example;
using corpus::NegativeKind;
using corpus::Vocabulary;

namespace {

std::string sentence_text(int i) {
  static const char* subjects[] = {"the cat", "a dog", "my friend", "the boat",
                                   "her house"};
  static const char* verbs[] = {"sailed", "slept", "jumped", "laughed",
                                "waited"};
  return std::string(subjects[i % 5]) + " " + verbs[(i * 3 + 1) % 5] +
         " quietly .";
}

Document doc_with_sentences(int n) {
  std::string text;
  for (int i = 0; i < n; ++i) {
    if (!text.empty()) text += ' ';
    text += sentence_text(i);
  }
  return {"d", text};
}

std::map<std::string, std::int64_t> counts_of(
    std::initializer_list<std::pair<const char*, std::int64_t>> items) {
  std::map<std::string, std::int64_t> m;
  for (auto& [k, v] : items) m[k] = v;
  return m;
}

}  // namespace

TEST_CASE("segment_sentences basic examples") {
  auto join = [](const Tokens& t) {
    std::string s;
    for (const auto& tok : t) {
      if (!s.empty()) s += ' ';
      s += tok;
    }
    return s;
  };

  auto s = corpus::segment_sentences("Hello. World!");
  REQUIRE(s.size() == 2);
  CHECK(join(s[0]) == "Hello .");
  CHECK(join(s[1]) == "World !");

  CHECK(corpus::segment_sentences("").empty());

  s = corpus::segment_sentences("No terminator");
  REQUIRE(s.size() == 1);
  CHECK(join(s[0]) == "No terminator");
}

TEST_CASE("segment_sentences abbreviations and inner punctuation") {
  auto s = corpus::segment_sentences("mr. smith arrived. he sat down.");
  REQUIRE(s.size() == 2);
  CHECK(s[0].front() == "mr");

  // A period not followed by whitespace does not end a sentence.
  s = corpus::segment_sentences("we paid 3.50 dollars. fine!");
  REQUIRE(s.size() == 2);
}

TEST_CASE("segment_sentences round trip") {
  const std::string texts[] = {
      "One two three. Four five! Six? Seven",
      "mr. jones said hi. really?  spacing   test .",
      "just words with no end",
  };
  for (const auto& text : texts) {
    const Tokens flat = corpus::tokenize(text);
    Tokens joined;
    for (const auto& sent : corpus::segment_sentences(text))
      joined.insert(joined.end(), sent.begin(), sent.end());
    CHECK(joined == flat);
  }
}

TEST_CASE("build_examples review mode") {
  const auto r12 = corpus::build_examples({doc_with_sentences(12)},
                                          CorpusMode::kReview);
  REQUIRE(r12.examples.size() == 1);
  CHECK(r12.skipped_documents == 0);
  const Example& ex = r12.examples[0];
  CHECK(ex.context_spans.size() == 5);
  CHECK(ex.continuation_spans.size() == 5);

  // Context holds sentences 1-5 and the continuation sentences 6-10.
  const auto all = corpus::segment_sentences(doc_with_sentences(12).text,
                                             true);
  Tokens expected_ctx;
  for (int i = 0; i < 5; ++i)
    expected_ctx.insert(expected_ctx.end(), all[i].begin(), all[i].end());
  CHECK(ex.context == expected_ctx);
  Tokens expected_cont;
  for (int i = 5; i < 10; ++i)
    expected_cont.insert(expected_cont.end(), all[i].begin(), all[i].end());
  CHECK(ex.continuation == expected_cont);

  const auto r9 =
      corpus::build_examples({doc_with_sentences(9)}, CorpusMode::kReview);
  CHECK(r9.examples.empty());
  CHECK(r9.skipped_documents == 1);
}

TEST_CASE("build_examples book mode tiles segments") {
  const auto r = corpus::build_examples({doc_with_sentences(25)},
                                        CorpusMode::kBook);
  REQUIRE(r.examples.size() == 2);
  const auto all = corpus::segment_sentences(doc_with_sentences(25).text,
                                             true);
  // Second example covers sentences 11-20; 21-25 are dropped.
  Tokens expected;
  for (int i = 10; i < 15; ++i)
    expected.insert(expected.end(), all[i].begin(), all[i].end());
  CHECK(r.examples[1].context == expected);
}

TEST_CASE("examples always hold five complete sentences per side") {
  std::vector<Document> docs;
  for (int n = 10; n < 16; ++n) docs.push_back(doc_with_sentences(n));
  const auto r = corpus::build_examples(docs, CorpusMode::kReview);
  for (const auto& ex : r.examples) {
    CHECK(corpus::complete_sentence_spans(ex.context).size() == 5);
    CHECK(corpus::complete_sentence_spans(ex.continuation).size() == 5);
    // Spans tile the sequence exactly.
    int at = 0;
    for (auto [b, e] : ex.context_spans) {
      CHECK(b == at);
      at = e;
    }
    CHECK(at == static_cast<int>(ex.context.size()));
  }
}

TEST_CASE("vocabulary keeps most frequent tokens") {
  const auto vocab = Vocabulary::build(
      counts_of({{"a", 5}, {"b", 3}, {"c", 1}}), Vocabulary::kNumSpecials + 2);
  CHECK(vocab.contains("a"));
  CHECK(vocab.contains("b"));
  CHECK(!vocab.contains("c"));
  CHECK(vocab.id_of("c") == Vocabulary::kUnk);
  CHECK(vocab.id_of("never-seen") == Vocabulary::kUnk);
}

TEST_CASE("vocabulary tie-break is lexicographic") {
  const auto vocab = Vocabulary::build(counts_of({{"b", 2}, {"a", 2}}),
                                       Vocabulary::kNumSpecials + 1);
  CHECK(vocab.contains("a"));
  CHECK(!vocab.contains("b"));
}

TEST_CASE("vocabulary rejects max_size without room") {
  CHECK_THROWS_AS(
      Vocabulary::build(counts_of({{"a", 1}}), Vocabulary::kNumSpecials),
      std::invalid_argument);
}

TEST_CASE("vocabulary lookup is total and round-trips") {
  const auto vocab = Vocabulary::build(
      counts_of({{"x", 4}, {"y", 2}, {"z", 1}}), 32);
  for (const std::string t : {"x", "y", "z", "w", "<unk>"}) {
    const TokenId id = vocab.id_of(t);
    REQUIRE(id >= 0);
    REQUIRE(id < vocab.size());
    const std::string& back = vocab.token_of(id);
    CHECK((back == t || back == Vocabulary::unk_token()));
  }
  CHECK(vocab.id_of(vocab.token_of(5)) == 5);
}

TEST_CASE("vocabulary save/load preserves ids and hash") {
  const auto vocab = Vocabulary::build(
      counts_of({{"pool", 9}, {"was", 7}, {"clean", 3}, {".", 20}}), 64);
  const std::string path = "test_vocab.txt";
  vocab.save(path, 123, 7);
  const auto loaded = Vocabulary::load(path);
  CHECK(loaded.hash() == vocab.hash());
  CHECK(loaded.id_of("pool") == vocab.id_of("pool"));
  CHECK(loaded.terminator_ids() == vocab.terminator_ids());
  std::remove(path.c_str());
}

namespace {

std::vector<Example> make_examples(int n, int sentences = 12) {
  std::vector<Document> docs;
  for (int i = 0; i < n; ++i) {
    Document d = doc_with_sentences(sentences);
    d.id = "d" + std::to_string(i);
    docs.push_back(d);
  }
  return corpus::build_examples(docs, CorpusMode::kReview).examples;
}

Vocabulary vocab_for(const std::vector<Example>& examples) {
  return corpus::build_vocabulary(examples, 2000);
}

}  // namespace

TEST_CASE("ranking pairs: count and equal lengths") {
  const auto examples = make_examples(10);
  const auto vocab = vocab_for(examples);

  const auto pairs = corpus::make_ranking_pairs(
      examples, NegativeKind::kRandomEnding, nullptr, vocab,
      corpus::kDefaultPrefixFractions, 11);
  CHECK(pairs.size() == 50);  // |examples| x |prefix set|
  for (const auto& p : pairs) {
    CHECK(p.gold.size() == p.negative.size());
    CHECK(static_cast<int>(p.gold.size()) == p.prefix_length);
  }
}

TEST_CASE("ranking pairs with lm-sample negatives") {
  const auto examples = make_examples(4);
  const auto vocab = vocab_for(examples);
  std::vector<std::int64_t> freq(static_cast<std::size_t>(vocab.size()), 1);
  lm::LmConfig mcfg;
  mcfg.emb_dim = 8;
  mcfg.hidden_dim = 8;
  lm::LanguageModel model(vocab.size(), freq, mcfg, vocab.hash());
  model.set_trained(true);

  const auto pairs = corpus::make_ranking_pairs(
      examples, NegativeKind::kLmSample, &model, vocab, {1.0}, 5);
  REQUIRE(pairs.size() == examples.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].gold.size() == pairs[i].negative.size());
    CHECK(pairs[i].gold ==
          vocab.encode(examples[i].continuation));  // 100% prefix
    for (TokenId t : pairs[i].negative) {
      CHECK(t != Vocabulary::kTerm);
      CHECK(t != Vocabulary::kBos);
      CHECK(t != Vocabulary::kPad);
    }
  }

  // Untrained model is rejected for lm-sample negatives.
  lm::LanguageModel untrained(vocab.size(), freq, mcfg, vocab.hash());
  CHECK_THROWS_AS(
      corpus::make_ranking_pairs(examples, NegativeKind::kLmSample, &untrained,
                                 vocab, {1.0}, 5),
      std::invalid_argument);
}

TEST_CASE("random-ending negatives never copy the example's own ending") {
  // Build examples with distinctive endings.
  std::vector<Document> docs;
  for (int i = 0; i < 6; ++i) {
    std::string text;
    for (int s = 0; s < 10; ++s) {
      if (!text.empty()) text += ' ';
      text += "doc" + std::to_string(i) + " sentence" + std::to_string(s) +
              " marker" + std::to_string(i) + " .";
    }
    docs.push_back({"d" + std::to_string(i), text});
  }
  const auto examples =
      corpus::build_examples(docs, CorpusMode::kReview).examples;
  const auto vocab = vocab_for(examples);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pairs = corpus::make_ranking_pairs(
        examples, NegativeKind::kRandomEnding, nullptr, vocab, {1.0}, seed);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      CHECK(pairs[i].negative != pairs[i].gold);
  }
}

TEST_CASE("ranking pairs need two examples for random endings") {
  const auto examples = make_examples(1);
  const auto vocab = vocab_for(examples);
  CHECK_THROWS_AS(
      corpus::make_ranking_pairs(examples, NegativeKind::kRandomEnding,
                                 nullptr, vocab, {1.0}, 5),
      std::invalid_argument);
}

TEST_CASE("synthetic NLI: balance, determinism, counts") {
  const auto examples = make_examples(6);
  const auto vocab = vocab_for(examples);

  const auto three = corpus::generate_synthetic_nli(vocab, 3, 42);
  std::set<corpus::NliLabel> labels;
  for (const auto& t : three) labels.insert(t.label);
  CHECK(labels.size() == 3);

  const auto a = corpus::generate_synthetic_nli(vocab, 50, 42);
  const auto b = corpus::generate_synthetic_nli(vocab, 50, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].premise == b[i].premise);
    CHECK(a[i].hypothesis == b[i].hypothesis);
    CHECK(a[i].label == b[i].label);
  }

  const auto big = corpus::generate_synthetic_nli(vocab, 300, 7);
  int counts[3] = {0, 0, 0};
  for (const auto& t : big) ++counts[static_cast<int>(t.label)];
  CHECK(counts[0] == 100);
  CHECK(counts[1] == 100);
  CHECK(counts[2] == 100);
}

TEST_CASE("corpus split covers all examples exactly once") {
  const auto examples = make_examples(40);
  const auto split = corpus::split_examples(examples, 3);
  const std::size_t total = split.lm_train.size() + split.scorer_train.size() +
                            split.weight_train.size() +
                            split.validation.size() + split.test.size();
  CHECK(total == examples.size());
  CHECK(split.lm_train.size() == 32);  // 80%
}

TEST_CASE("examples save/load round trip") {
  const auto examples = make_examples(3);
  const std::string path = "test_examples.jsonl";
  corpus::save_examples(path, examples, 9, 7, 1234);
  std::uint64_t vh = 0;
  const auto loaded = corpus::load_examples(path, &vh);
  CHECK(vh == 1234);
  REQUIRE(loaded.size() == examples.size());
  CHECK(loaded[1].context == examples[1].context);
  CHECK(loaded[1].continuation_spans == examples[1].continuation_spans);
  std::remove(path.c_str());
}

TEST_CASE("document reading in both modes") {
  {
    std::ofstream f("test_docs.txt", std::ios::binary);
    f << "first doc line one.\n\nsecond doc here.\n";
  }
  const auto review = corpus::read_documents("test_docs.txt",
                                             CorpusMode::kReview);
  CHECK(review.size() == 2);  // blank lines skipped in review mode
  const auto book = corpus::read_documents("test_docs.txt", CorpusMode::kBook);
  REQUIRE(book.size() == 2);
  CHECK(book[0].text == "first doc line one.");
  std::remove("test_docs.txt");
}
