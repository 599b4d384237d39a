// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "chorus/lm/adaptive_softmax.hpp"
#include "chorus/lm/model.hpp"
#include "chorus/lm/train.hpp"
#include "chorus/nn/functions.hpp"
#include "common/gradcheck.hpp"

using namespace chorus;
using lm::ClusterPartition;
using lm::LanguageModel;
using lm::LmConfig;
using lm::LmTrainConfig;

namespace {

std::vector<std::int64_t> flat_freq(int v) {
  std::vector<std::int64_t> f(static_cast<std::size_t>(v));
  for (int i = 0; i < v; ++i) f[static_cast<std::size_t>(i)] = v - i;
  return f;
}

LanguageModel tiny_model(int vocab = 10, int emb = 4, int hidden = 4,
                         std::uint64_t seed = 3) {
  LmConfig cfg;
  cfg.emb_dim = emb;
  cfg.hidden_dim = hidden;
  cfg.num_clusters = 3;
  cfg.seed = seed;
  return LanguageModel(vocab, flat_freq(vocab), cfg, 0);
}

// Zeroes everything feeding the output logits; the cluster bias keeps its
// band-share prior, so the distribution becomes exactly uniform.
void zero_output_layer(LanguageModel& m) {
  m.params().embedding.setZero();
  m.params().out_proj.setZero();
  m.params().out_bias.setZero();
  m.params().cluster_proj.setZero();
}

TokenIds repeated_sentence_stream(int repeats) {
  const TokenIds sentence = {4, 5, 6, 7, 8};
  TokenIds stream;
  for (int i = 0; i < repeats; ++i)
    stream.insert(stream.end(), sentence.begin(), sentence.end());
  return stream;
}

}  // namespace

TEST_CASE("zeroed output layer gives the uniform distribution") {
  auto m = tiny_model();
  zero_output_layer(m);
  const Vector lp = m.next_token_logprobs({4, 5});
  for (Eigen::Index i = 0; i < lp.size(); ++i)
    CHECK(lp[i] == doctest::Approx(-std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("next-token distributions are normalized") {
  const auto m = tiny_model(17, 6, 8, 9);
  for (int len = 0; len < 5; ++len) {
    TokenIds prefix;
    for (int i = 0; i < len; ++i) prefix.push_back((i * 5 + 4) % 17);
    const Vector lp = m.next_token_logprobs(prefix);
    CHECK(lp.array().exp().sum() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("unknown token ids are rejected") {
  const auto m = tiny_model();
  CHECK_THROWS_AS(m.next_token_logprobs({3, 99}), std::out_of_range);
  CHECK_THROWS_AS(m.sequence_logprob({-1}), std::out_of_range);
}

TEST_CASE("clustered softmax equals a flat softmax oracle") {
  // 20-word vocabulary, arbitrary logits; cluster logits set to the
  // logsumexp of their members make the factorization exact.
  const int v = 20;
  const auto part = ClusterPartition::frequency_bands(flat_freq(v));
  Rng rng(12);
  Vector word_logits(v);
  for (int i = 0; i < v; ++i) word_logits[i] = rng.uniform(-3.0, 3.0);

  Vector cluster_logits(part.num_clusters());
  for (int c = 0; c < part.num_clusters(); ++c) {
    const auto& ids = part.members[static_cast<std::size_t>(c)];
    Vector member_logits(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i)
      member_logits[static_cast<Eigen::Index>(i)] = word_logits[ids[i]];
    cluster_logits[c] = nn::logsumexp(member_logits);
  }

  const Vector clustered =
      lm::clustered_log_softmax(cluster_logits, word_logits, part);
  const Vector flat = nn::log_softmax(word_logits);
  for (int i = 0; i < v; ++i)
    CHECK(std::exp(clustered[i]) ==
          doctest::Approx(std::exp(flat[i])).epsilon(1e-6));
}

TEST_CASE("frequency bands partition the vocabulary exactly once") {
  const auto part = ClusterPartition::frequency_bands(flat_freq(20));
  REQUIRE(part.num_clusters() == 3);
  CHECK(part.members[0].size() == 4);   // top 20%
  CHECK(part.members[1].size() == 6);   // next 30%
  CHECK(part.members[2].size() == 10);  // rest
  std::vector<int> seen(20, 0);
  for (const auto& m : part.members)
    for (int id : m) ++seen[static_cast<std::size_t>(id)];
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("sequence logprob: uniform case and chain rule") {
  auto m = tiny_model();
  zero_output_layer(m);
  const TokenIds seq = {4, 5, 6, 7};
  CHECK(m.sequence_logprob(seq) ==
        doctest::Approx(-4.0 * std::log(10.0)).epsilon(1e-12));

  const auto trained_like = tiny_model(10, 4, 4, 77);
  const TokenIds s = {4, 5, 6, 7, 8, 9};
  for (std::size_t split = 1; split < s.size(); ++split) {
    const TokenIds head(s.begin(),
                        s.begin() + static_cast<std::ptrdiff_t>(split));
    double tail_terms = 0.0;
    TokenIds prefix = head;
    for (std::size_t i = split; i < s.size(); ++i) {
      tail_terms += trained_like.next_token_logprobs(prefix)[s[i]];
      prefix.push_back(s[i]);
    }
    CHECK(trained_like.sequence_logprob(s) ==
          doctest::Approx(trained_like.sequence_logprob(head) + tail_terms)
              .epsilon(1e-12));
  }

  CHECK_THROWS_AS(m.sequence_logprob({}), std::invalid_argument);
}

TEST_CASE("length-2 sequence probabilities sum to one") {
  const auto m = tiny_model(10, 4, 4, 21);
  double total = 0.0;
  for (TokenId a = 0; a < 10; ++a)
    for (TokenId b = 0; b < 10; ++b)
      total += std::exp(m.sequence_logprob({a, b}));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("sampling: greedy limit and determinism") {
  const auto m = tiny_model(12, 6, 6, 5);
  const TokenIds ctx = {4, 7};

  // Temperature near zero concentrates all mass on the argmax path.
  const TokenIds greedy_sample = m.sample_continuation(ctx, 8, 1e-12, 99);
  TokenIds greedy_oracle;
  {
    TokenIds prefix = ctx;
    for (int i = 0; i < 8; ++i) {
      const Vector lp = m.next_token_logprobs(prefix);
      Eigen::Index best;
      lp.maxCoeff(&best);
      if (static_cast<TokenId>(best) == LanguageModel::kTerm) break;
      greedy_oracle.push_back(static_cast<TokenId>(best));
      prefix.push_back(static_cast<TokenId>(best));
    }
  }
  CHECK(greedy_sample == greedy_oracle);

  const TokenIds a = m.sample_continuation(ctx, 20, 1.0, 1234);
  const TokenIds b = m.sample_continuation(ctx, 20, 1.0, 1234);
  CHECK(a == b);
  CHECK_THROWS_AS(m.sample_continuation(ctx, 5, 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("sampled unigram frequencies match enumerated marginals") {
  // 5-word model, continuations of up to 2 tokens: enumerate every path to
  // get exact expected token counts per sample, then compare 10k samples
  // within 3 sigma.
  const int v = 5;
  LmConfig cfg;
  cfg.emb_dim = 4;
  cfg.hidden_dim = 4;
  cfg.num_clusters = 1;
  cfg.seed = 31;
  const LanguageModel m(v, flat_freq(v), cfg, 0);
  const TokenIds ctx = {4};
  const int max_tokens = 2;

  std::map<TokenId, double> expect, second_moment;
  {
    const Vector lp1 = m.next_token_logprobs(ctx);
    for (TokenId t1 = 0; t1 < v; ++t1) {
      const double p1 = std::exp(lp1[t1]);
      if (t1 == LanguageModel::kTerm) continue;  // empty continuation
      TokenIds prefix = ctx;
      prefix.push_back(t1);
      const Vector lp2 = m.next_token_logprobs(prefix);
      for (TokenId t2 = 0; t2 < v; ++t2) {
        const double p = p1 * std::exp(lp2[t2]);
        std::map<TokenId, int> counts;
        ++counts[t1];
        if (t2 != LanguageModel::kTerm) ++counts[t2];
        for (auto& [tok, c] : counts) {
          expect[tok] += p * c;
          second_moment[tok] += p * c * c;
        }
      }
    }
  }

  const int n = 10000;
  std::map<TokenId, long> observed;
  for (int i = 0; i < n; ++i) {
    const TokenIds s = m.sample_continuation(
        ctx, max_tokens, 1.0, derive_seed(17, static_cast<std::uint64_t>(i)));
    for (TokenId t : s) ++observed[t];
  }
  for (auto& [tok, mean] : expect) {
    const double var = second_moment[tok] - mean * mean;
    const double sigma = std::sqrt(std::max(var, 1e-12) * n);
    CHECK(std::abs(static_cast<double>(observed[tok]) - mean * n) <=
          3.0 * sigma + 1e-9);
  }
}

TEST_CASE("perplexity: uniform model and definition") {
  auto m = tiny_model();
  zero_output_layer(m);
  CHECK(m.perplexity({4, 5, 6}) == doctest::Approx(10.0).epsilon(1e-9));

  const auto r = tiny_model(10, 4, 4, 13);
  const TokenIds stream = {4, 5, 6, 7};
  CHECK(r.perplexity(stream) ==
        doctest::Approx(std::exp(-r.sequence_logprob(stream) / 4.0))
            .epsilon(1e-12));
  CHECK_THROWS_AS(r.perplexity({}), std::invalid_argument);
}

TEST_CASE("tied embeddings: one matrix serves input and output") {
  auto m = tiny_model(10, 4, 4, 57);
  const TokenIds prefix = {5, 6};
  const Vector before_out = m.next_token_logprobs(prefix);
  const Vector before_in = m.next_token_logprobs({7, 7});

  m.params().embedding.row(7).array() += 0.5;

  // Output side: the logit of token 7 changes for the same prefix.
  const Vector after_out = m.next_token_logprobs(prefix);
  CHECK(after_out[7] != before_out[7]);
  // Input side: a prefix containing token 7 produces a different state.
  const Vector after_in = m.next_token_logprobs({7, 7});
  CHECK((after_in - before_in).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("training loss gradient matches finite differences") {
  auto m = tiny_model(10, 4, 4, 41);
  const std::vector<TokenIds> inputs = {{2, 4}, {5, 6}, {7, 8}, {4, 9}};
  const std::vector<TokenIds> targets = {{5, 6}, {7, 8}, {4, 9}, {6, 4}};

  auto loss_at = [&](const Vector& flat) {
    LanguageModel probe = m;
    nn::unpack_params(probe.params(), flat);
    Matrix h1 = Matrix::Zero(4, 2), h2 = Matrix::Zero(4, 2);
    auto grads = nn::zeros_like(probe.params());
    return lm::lm_loss_and_grad(probe, inputs, targets, h1, h2, grads, 0.0,
                                nullptr);
  };

  Matrix h1 = Matrix::Zero(4, 2), h2 = Matrix::Zero(4, 2);
  auto grads = nn::zeros_like(m.params());
  lm::lm_loss_and_grad(m, inputs, targets, h1, h2, grads, 0.0, nullptr);

  const auto result = testing::gradcheck(loss_at, nn::pack_params(m.params()),
                                         nn::pack_params(grads));
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  LmTrainConfig tc;
  tc.learning_rate = 0.0;
  tc.batch_size = 2;
  tc.bptt_len = 5;
  tc.epochs = 2;
  tc.check_interval = 1000;
  tc.dropout = 0.0;
  tc.seed = 3;
  LmConfig mc;
  mc.emb_dim = 4;
  mc.hidden_dim = 4;
  mc.seed = 3;
  const TokenIds stream = repeated_sentence_stream(10);

  const LanguageModel trained =
      lm::train_lm(stream, stream, flat_freq(10), 10, mc, tc, 0);
  const LanguageModel fresh(10, flat_freq(10), mc, 0);
  CHECK(nn::pack_params(trained.params()) == nn::pack_params(fresh.params()));
}

TEST_CASE("memorization: perplexity approaches one on a repeated sentence") {
  LmConfig mc;
  mc.emb_dim = 16;
  mc.hidden_dim = 24;
  mc.seed = 5;
  LmTrainConfig tc;
  tc.learning_rate = 8.0;
  tc.batch_size = 2;
  tc.bptt_len = 10;
  tc.epochs = 60;
  tc.check_interval = 40;
  tc.dropout = 0.0;
  tc.seed = 5;

  const TokenIds train_stream = repeated_sentence_stream(60);
  const TokenIds eval_stream = repeated_sentence_stream(20);
  const LanguageModel m =
      lm::train_lm(train_stream, eval_stream, flat_freq(10), 10, mc, tc, 0);
  CHECK(m.perplexity(eval_stream) < 1.05);
}

TEST_CASE("trained model beats a unigram baseline") {
  // Bigram-structured stream: token pairs (2k, 2k+1) always adjacent.
  Rng rng(8);
  TokenIds stream;
  for (int i = 0; i < 3000; ++i) {
    const TokenId k = static_cast<TokenId>(4 + 2 * rng.uniform_int(5));
    stream.push_back(k);
    stream.push_back(k + 1);
  }
  const TokenIds train(stream.begin(), stream.begin() + 5000);
  const TokenIds held(stream.begin() + 5000, stream.end());

  LmConfig mc;
  mc.emb_dim = 12;
  mc.hidden_dim = 16;
  mc.seed = 4;
  LmTrainConfig tc;
  tc.learning_rate = 8.0;
  tc.batch_size = 4;
  tc.bptt_len = 20;
  tc.epochs = 4;
  tc.check_interval = 30;
  tc.dropout = 0.0;
  tc.seed = 4;
  const LanguageModel m =
      lm::train_lm(train, held, flat_freq(14), 14, mc, tc, 0);

  // Unigram oracle with add-one smoothing from training counts.
  std::vector<double> counts(14, 1.0);
  for (TokenId t : train) counts[static_cast<std::size_t>(t)] += 1.0;
  double total = 0.0;
  for (double c : counts) total += c;
  double unigram_ll = 0.0;
  for (TokenId t : held)
    unigram_ll += std::log(counts[static_cast<std::size_t>(t)] / total);
  const double unigram_ppl =
      std::exp(-unigram_ll / static_cast<double>(held.size()));

  CHECK(m.perplexity(held) < unigram_ppl);
}

TEST_CASE("training is deterministic given the seed") {
  LmConfig mc;
  mc.emb_dim = 6;
  mc.hidden_dim = 6;
  mc.seed = 11;
  LmTrainConfig tc;
  tc.learning_rate = 4.0;
  tc.batch_size = 2;
  tc.bptt_len = 6;
  tc.epochs = 3;
  tc.check_interval = 10;
  tc.seed = 11;
  const TokenIds stream = repeated_sentence_stream(30);

  const auto a = lm::train_lm(stream, stream, flat_freq(10), 10, mc, tc, 0);
  const auto b = lm::train_lm(stream, stream, flat_freq(10), 10, mc, tc, 0);
  const Vector pa = nn::pack_params(a.params());
  const Vector pb = nn::pack_params(b.params());
  REQUIRE(pa.size() == pb.size());
  for (Eigen::Index i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);
}

TEST_CASE("non-finite loss aborts training") {
  LmConfig mc;
  mc.emb_dim = 4;
  mc.hidden_dim = 4;
  mc.seed = 2;

  // Poisoned parameters make the chunk loss non-finite.
  LanguageModel m(10, flat_freq(10), mc, 0);
  m.params().embedding(4, 0) = std::numeric_limits<double>::quiet_NaN();
  Matrix h1 = Matrix::Zero(4, 2), h2 = Matrix::Zero(4, 2);
  auto grads = nn::zeros_like(m.params());
  const double loss = lm::lm_loss_and_grad(m, {{4, 5}}, {{5, 6}}, h1, h2,
                                           grads, 0.0, nullptr);
  CHECK(!std::isfinite(loss));
}

TEST_CASE("checkpoint round trip is bitwise") {
  auto m = tiny_model(10, 4, 4, 19);
  m.set_trained(true);
  const std::string path = "test_lm.ckpt";
  m.save(path, 111, 7);
  const auto loaded = LanguageModel::load(path);
  CHECK(loaded.trained());
  CHECK(loaded.vocab_size() == 10);
  const Vector pa = nn::pack_params(m.params());
  const Vector pb = nn::pack_params(loaded.params());
  REQUIRE(pa.size() == pb.size());
  for (Eigen::Index i = 0; i < pa.size(); ++i) CHECK(pa[i] == pb[i]);

  // Scoring goes through identically.
  CHECK(m.sequence_logprob({4, 5, 6}) == loaded.sequence_logprob({4, 5, 6}));
  std::remove(path.c_str());
}
