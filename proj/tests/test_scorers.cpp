// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chorus/corpus/nli_gen.hpp"
#include "chorus/nn/functions.hpp"
#include "chorus/scorers/entailment.hpp"
#include "chorus/scorers/ranking_train.hpp"
#include "chorus/scorers/relevance.hpp"
#include "chorus/scorers/repetition.hpp"
#include "chorus/scorers/style.hpp"
#include "common/gradcheck.hpp"

using namespace chorus;
using corpus::NliLabel;
using corpus::NliTriple;
using corpus::RankingPair;
using scorers::EntailmentConfig;
using scorers::EntailmentScorer;
using scorers::RelevanceConfig;
using scorers::RelevanceScorer;
using scorers::RepetitionConfig;
using scorers::RepetitionScorer;
using scorers::StyleConfig;
using scorers::StyleScorer;

namespace {

constexpr int kVocab = 16;
constexpr TokenId kDot = 4;  // sentence terminator id in these tests

RepetitionScorer make_repetition(std::uint64_t seed = 3, int window = 8) {
  RepetitionConfig cfg;
  cfg.emb_dim = 6;
  cfg.hidden_dim = 5;
  cfg.window = window;
  cfg.dropout = 0.0;
  cfg.seed = seed;
  return RepetitionScorer(kVocab, cfg, 0);
}

RelevanceScorer make_relevance(std::uint64_t seed = 3) {
  RelevanceConfig cfg;
  cfg.emb_dim = 6;
  cfg.filters = 4;
  cfg.dropout = 0.0;
  cfg.seed = seed;
  return RelevanceScorer(kVocab, cfg, 0);
}

StyleScorer make_style(std::uint64_t seed = 3) {
  StyleConfig cfg;
  cfg.emb_dim = 6;
  cfg.dropout = 0.0;
  cfg.seed = seed;
  return StyleScorer(kVocab, cfg, 0);
}

EntailmentScorer make_entailment(std::uint64_t seed = 3) {
  EntailmentConfig cfg;
  cfg.emb_dim = 6;
  cfg.proj_dim = 5;
  cfg.hidden_dim = 5;
  cfg.dropout = 0.0;
  cfg.seed = seed;
  return EntailmentScorer(kVocab, cfg, 0, {kDot});
}

TokenIds random_tokens(Rng& rng, int len, bool end_with_dot = false) {
  TokenIds out;
  for (int i = 0; i < len; ++i)
    out.push_back(static_cast<TokenId>(5 + rng.uniform_int(kVocab - 5)));
  if (end_with_dot) out.push_back(kDot);
  return out;
}

}  // namespace

TEST_CASE("repetition similarities") {
  auto s = make_repetition();

  // First position gets the empty-window sentinel.
  const Vector d1 = s.similarities({7});
  CHECK(d1[0] == -1.0);

  // An identical token inside the window scores exactly one.
  const Vector d = s.similarities({7, 8, 7});
  CHECK(d[2] == 1.0);
  CHECK(d.maxCoeff() <= 1.0);
  CHECK(d.minCoeff() >= -1.0);

  // Orthogonal embeddings give zero similarity past position one.
  s.params().embedding.setZero();
  for (int i = 0; i < kVocab; ++i) s.params().embedding(i, i % 6) = 1.0;
  const Vector dz = s.similarities({5, 6, 7});  // distinct one-hot rows
  CHECK(dz[0] == -1.0);
  CHECK(dz[1] == doctest::Approx(0.0));
  CHECK(dz[2] == doctest::Approx(0.0));

  CHECK_THROWS_AS(s.similarities({}), std::invalid_argument);
}

TEST_CASE("repetition window bounds the lookback") {
  auto s = make_repetition(3, /*window=*/2);
  // Token 7 recurs outside the window of two.
  const Vector d = s.similarities({7, 5, 6, 7});
  CHECK(d[3] < 1.0);
  // And inside it.
  const Vector d2 = s.similarities({5, 7, 6, 7});
  CHECK(d2[3] == 1.0);
}

TEST_CASE("repetition score: sigmoid midpoint and range") {
  auto s = make_repetition();
  s.params().w_read.setZero();
  const auto out = s.score({}, {5, 6, 7});
  CHECK(out.raw == 0.5);
  CHECK(out.log_prob == doctest::Approx(std::log(0.5)).epsilon(1e-12));

  auto r = make_repetition(17);
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) {
    const auto o = r.score({}, random_tokens(rng, 1 + rng.uniform_int(12)));
    CHECK(o.raw > 0.0);
    CHECK(o.raw < 1.0);
    CHECK(o.log_prob <= 0.0);
  }
}

TEST_CASE("ranking loss at equal scores is log 2") {
  auto s = make_repetition();
  s.params().w_read.setZero();  // every sequence scores 0.5
  RankingPair pair;
  pair.context = {5};
  pair.gold = {5, 6, 7};
  pair.negative = {8, 9, 10};
  auto grads = nn::zeros_like(s.params());
  const double loss = scorers::ranking_loss_and_grad(s, {pair}, grads,
                                                     nullptr);
  CHECK(loss == doctest::Approx(0.6931471805599453).epsilon(1e-6));
}

TEST_CASE("ranking loss symmetry") {
  auto s = make_repetition(23);
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    RankingPair fwd;
    fwd.context = {5};
    fwd.gold = random_tokens(rng, 4 + rng.uniform_int(6));
    fwd.negative = random_tokens(rng, 4 + rng.uniform_int(6));
    RankingPair rev = fwd;
    std::swap(rev.gold, rev.negative);
    auto g = nn::zeros_like(s.params());
    const double a = scorers::ranking_loss_and_grad(s, {fwd}, g, nullptr);
    const double b = scorers::ranking_loss_and_grad(s, {rev}, g, nullptr);
    CHECK(a + b >= 2.0 * std::log(2.0) - 1e-12);
  }
  // Equality holds exactly when the two scores coincide.
  RankingPair same;
  same.context = {5};
  same.gold = {6, 7};
  same.negative = {6, 7};
  auto g = nn::zeros_like(s.params());
  const double a = scorers::ranking_loss_and_grad(s, {same}, g, nullptr);
  CHECK(2.0 * a == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("zero learning rate leaves ranking scorer unchanged") {
  auto s = make_repetition(29);
  const Vector before = nn::pack_params(s.params());
  std::vector<RankingPair> pairs;
  Rng rng(4);
  for (int i = 0; i < 8; ++i) {
    RankingPair p;
    p.context = {5};
    p.gold = random_tokens(rng, 5);
    p.negative = random_tokens(rng, 5);
    pairs.push_back(p);
  }
  scorers::RankingTrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  scorers::train_ranking_scorer(s, pairs, cfg);
  const Vector after = nn::pack_params(s.params());
  for (Eigen::Index i = 0; i < before.size(); ++i)
    CHECK(before[i] == after[i]);
}

TEST_CASE("relevance score basics") {
  auto s = make_relevance();
  SUBCASE("zero readout gives log-sigmoid of zero") {
    s.params().w_read.setZero();
    const auto out = s.score({5, 6}, {7, 8});
    CHECK(out.raw == 0.0);
    CHECK(out.log_prob == doctest::Approx(-0.6931471805599453).epsilon(1e-9));
  }
  SUBCASE("all-ones pooled vectors score the filter count") {
    s.params().conv_ctx.setZero();
    s.params().conv_cont.setZero();
    s.params().conv_ctx_bias.setOnes();
    s.params().conv_cont_bias.setOnes();
    s.params().w_read.setOnes();
    const auto out = s.score({5, 6, 7}, {8, 9});
    CHECK(out.raw == doctest::Approx(4.0).epsilon(1e-12));  // filters = 4
  }
  SUBCASE("maxpool over a single position is that position's output") {
    const Vector pooled = s.pooled_continuation({9});
    // With one column the pool must equal the convolution output itself,
    // which for a single token is conv(0, e, 0) + bias.
    RelevanceScorer::Cache cache;
    s.train_score({5}, {9}, cache, nullptr);
    CHECK(cache.cont.conv_out.cols() == 1);
    CHECK(pooled == cache.cont.conv_out.col(0));
  }
}

TEST_CASE("relevance prepared-context path is bitwise identical") {
  const auto s = make_relevance(31);
  Rng rng(6);
  for (int i = 0; i < 20; ++i) {
    const TokenIds x = random_tokens(rng, 6 + rng.uniform_int(5));
    const TokenIds y = random_tokens(rng, 3 + rng.uniform_int(8));
    const auto cache = s.prepare_context(x);
    const auto direct = s.score(x, y);
    const auto prepared = s.score_prepared(cache.get(), x, y);
    CHECK(direct.raw == prepared.raw);
    CHECK(direct.log_prob == prepared.log_prob);
  }
}

TEST_CASE("style score basics") {
  auto s = make_style();
  SUBCASE("single token pools to its embedding") {
    const Vector mp = s.maxpooled({7});
    const Vector emb = s.params().embedding.row(7).transpose();
    CHECK(mp == emb);
  }
  SUBCASE("per-dimension max") {
    s.params().embedding.row(5) << 0.1, 0.9, 0, 0, 0, 0;
    s.params().embedding.row(6) << 0.5, 0.2, 0, 0, 0, 0;
    const Vector mp = s.maxpooled({5, 6});
    CHECK(mp[0] == doctest::Approx(0.5));
    CHECK(mp[1] == doctest::Approx(0.9));
  }
  SUBCASE("zero readout") {
    s.params().w_read.setZero();
    const auto out = s.score({}, {5, 6, 7});
    CHECK(out.raw == 0.0);
    CHECK(out.log_prob == doctest::Approx(-0.6931471805599453).epsilon(1e-9));
  }
  CHECK_THROWS_AS(s.score({}, {}), std::invalid_argument);
}

TEST_CASE("nli classification probabilities") {
  auto s = make_entailment();
  SUBCASE("zeroed final layer is uniform over the three classes") {
    s.params().out_w.setZero();
    s.params().out_b.setZero();
    const Vector p = s.nli_classify({5, 6, 7}, {8, 9});
    for (int i = 0; i < 3; ++i)
      CHECK(p[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("probabilities stay in the simplex") {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
      const Vector p = s.nli_classify(random_tokens(rng, 1 + rng.uniform_int(7)),
                                      random_tokens(rng, 1 + rng.uniform_int(7)));
      CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(p.minCoeff() >= 0.0);
    }
  }
  CHECK_THROWS_AS(s.nli_classify({}, {5}), std::invalid_argument);
}

TEST_CASE("entailment score follows the minimum rule") {
  const auto s = make_entailment(41);
  const TokenIds ctx_one = {5, 6, kDot};
  const TokenIds ctx_two = {5, 6, kDot, 8, 9, kDot};
  const TokenIds y = {10, 11, kDot};

  // Singleton: the score equals the single pair value.
  const auto single = s.score(ctx_one, y);
  CHECK(single.raw ==
        doctest::Approx(s.neutral_logprob({5, 6, kDot}, y)).epsilon(1e-12));

  // Adding a preceding sentence can only lower the score.
  const auto two = s.score(ctx_two, y);
  CHECK(two.raw <= single.raw + 1e-12);
  const double second_pair = s.neutral_logprob({8, 9, kDot}, y);
  CHECK(two.raw == doctest::Approx(std::min(single.raw, second_pair))
                       .epsilon(1e-12));

  // No completed sentence in the prefix: the initial carry value.
  const auto none = s.score(ctx_one, {10, 11});
  CHECK(none.raw == 0.0);
  CHECK(none.log_prob == 0.0);
}

TEST_CASE("entailment mid-sentence score equals the last boundary score") {
  const auto s = make_entailment(43);
  const TokenIds ctx = {5, 6, kDot, 7, 8, kDot};
  const TokenIds at_boundary = {9, 10, kDot};
  TokenIds mid = at_boundary;
  mid.push_back(11);
  mid.push_back(12);
  CHECK(s.score(ctx, mid).raw == s.score(ctx, at_boundary).raw);
}

TEST_CASE("entailment min never increases with more preceding sentences") {
  const auto s = make_entailment(47);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const TokenIds y = random_tokens(rng, 3, true);
    TokenIds ctx;
    double prev = std::numeric_limits<double>::infinity();
    for (int sent = 0; sent < 4; ++sent) {
      TokenIds add = random_tokens(rng, 2 + rng.uniform_int(3), true);
      ctx.insert(ctx.end(), add.begin(), add.end());
      const double score = s.score(ctx, y).raw;
      CHECK(score <= prev + 1e-12);
      prev = score;
    }
  }
}

TEST_CASE("train_nli rejects single-class input") {
  auto s = make_entailment();
  std::vector<NliTriple> one_class = {
      {{5, 6}, {7}, NliLabel::kNeutral},
      {{8, 9}, {10}, NliLabel::kNeutral},
  };
  CHECK_THROWS_AS(scorers::train_nli(s, one_class, {}),
                  std::invalid_argument);
}

TEST_CASE("untrained balanced NLI loss is about log 3") {
  const auto s = make_entailment(51);
  std::vector<NliTriple> batch;
  Rng rng(7);
  for (int i = 0; i < 30; ++i)
    batch.push_back({random_tokens(rng, 3), random_tokens(rng, 3),
                     static_cast<NliLabel>(i % 3)});
  auto grads = nn::zeros_like(s.params());
  const double loss = s.loss_and_grad(batch, grads, nullptr);
  CHECK(loss == doctest::Approx(std::log(3.0)).epsilon(0.05));
}

TEST_CASE("zero learning rate leaves NLI parameters unchanged") {
  auto s = make_entailment(53);
  const Vector before = nn::pack_params(s.params());
  std::vector<NliTriple> triples;
  Rng rng(8);
  for (int i = 0; i < 12; ++i)
    triples.push_back({random_tokens(rng, 3), random_tokens(rng, 3),
                       static_cast<NliLabel>(i % 3)});
  scorers::NliTrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 2;
  scorers::train_nli(s, triples, cfg);
  const Vector after = nn::pack_params(s.params());
  for (Eigen::Index i = 0; i < before.size(); ++i)
    CHECK(before[i] == after[i]);
}

TEST_CASE("prefix contract: full continuation equals whole-sequence score") {
  const auto rep = make_repetition(61);
  const auto rel = make_relevance(61);
  const auto sty = make_style(61);
  const auto ent = make_entailment(61);
  const std::vector<const scorers::PrefixScorer*> all = {&rep, &rel, &sty,
                                                         &ent};
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    TokenIds x = random_tokens(rng, 3, true);
    TokenIds y;
    for (int sent = 0; sent < 2; ++sent) {
      const TokenIds s = random_tokens(rng, 2 + rng.uniform_int(4), true);
      y.insert(y.end(), s.begin(), s.end());
    }
    for (const auto* scorer : all) {
      const auto whole = scorer->score(x, y);
      const auto prefix = scorer->score(x, y);  // prefix of length n
      CHECK(whole.raw == prefix.raw);
      CHECK(whole.log_prob == prefix.log_prob);
      CHECK(prefix.log_prob <= 0.0);
    }
  }
}

TEST_CASE("scorer purity: repeated calls agree bitwise") {
  const auto rep = make_repetition(67);
  const auto ent = make_entailment(67);
  Rng rng(11);
  const TokenIds x = random_tokens(rng, 4, true);
  const TokenIds y = random_tokens(rng, 6, true);
  CHECK(rep.score(x, y).log_prob == rep.score(x, y).log_prob);
  CHECK(ent.score(x, y).log_prob == ent.score(x, y).log_prob);
  CHECK(rep.score(x, {5}).raw > 0.0);  // length-1 prefix uses the sentinel
}

namespace {

// Finite differences over an explicit tensor subset (the trainable set).
template <class Params>
struct SubsetView {
  std::vector<double*> data;
  std::vector<Eigen::Index> sizes;

  Eigen::Index total() const {
    Eigen::Index t = 0;
    for (auto s : sizes) t += s;
    return t;
  }
  Vector pack() const {
    Vector out(total());
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      out.segment(at, sizes[i]) = Eigen::Map<const Vector>(data[i], sizes[i]);
      at += sizes[i];
    }
    return out;
  }
  void unpack(const Vector& v) const {
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      Eigen::Map<Vector>(data[i], sizes[i]) = v.segment(at, sizes[i]);
      at += sizes[i];
    }
  }
};

}  // namespace

TEST_CASE("ranking-loss gradients match finite differences") {
  Rng rng(12);
  std::vector<RankingPair> pairs;
  for (int i = 0; i < 3; ++i) {
    RankingPair p;
    p.context = random_tokens(rng, 5);
    p.gold = random_tokens(rng, 4);
    p.negative = random_tokens(rng, 4);
    pairs.push_back(p);
  }

  SUBCASE("repetition (embeddings frozen)") {
    auto s = make_repetition(71);
    SubsetView<RepetitionScorer::Params> view;
    auto add = [&](auto& t) {
      view.data.push_back(t.data());
      view.sizes.push_back(t.size());
    };
    add(s.params().w_in);
    add(s.params().u_rec);
    add(s.params().b);
    add(s.params().w_read);

    auto grads = nn::zeros_like(s.params());
    scorers::ranking_loss_and_grad(s, pairs, grads, nullptr);
    CHECK(grads.embedding.cwiseAbs().maxCoeff() == 0.0);  // frozen

    SubsetView<RepetitionScorer::Params> gview;
    auto gadd = [&](auto& t) {
      gview.data.push_back(t.data());
      gview.sizes.push_back(t.size());
    };
    gadd(grads.w_in);
    gadd(grads.u_rec);
    gadd(grads.b);
    gadd(grads.w_read);

    const Vector at = view.pack();
    auto loss_at = [&](const Vector& v) {
      view.unpack(v);
      auto g = nn::zeros_like(s.params());
      const double loss = scorers::ranking_loss_and_grad(s, pairs, g, nullptr);
      view.unpack(at);
      return loss;
    };
    const auto result = testing::gradcheck(loss_at, at, gview.pack());
    CHECK(result.max_rel_error < 1e-4);
  }

  SUBCASE("relevance (all parameters)") {
    auto s = make_relevance(73);
    Vector flat = nn::pack_params(s.params());
    testing::dekink(flat, 99);
    nn::unpack_params(s.params(), flat);

    auto grads = nn::zeros_like(s.params());
    scorers::ranking_loss_and_grad(s, pairs, grads, nullptr);
    auto loss_at = [&](const Vector& v) {
      RelevanceScorer probe = s;
      nn::unpack_params(probe.params(), v);
      auto g = nn::zeros_like(probe.params());
      return scorers::ranking_loss_and_grad(probe, pairs, g, nullptr);
    };
    const auto result =
        testing::gradcheck(loss_at, flat, nn::pack_params(grads));
    CHECK(result.max_rel_error < 1e-4);
  }

  SUBCASE("style (all parameters)") {
    auto s = make_style(79);
    Vector flat = nn::pack_params(s.params());
    testing::dekink(flat, 98);
    nn::unpack_params(s.params(), flat);

    auto grads = nn::zeros_like(s.params());
    scorers::ranking_loss_and_grad(s, pairs, grads, nullptr);
    auto loss_at = [&](const Vector& v) {
      StyleScorer probe = s;
      nn::unpack_params(probe.params(), v);
      auto g = nn::zeros_like(probe.params());
      return scorers::ranking_loss_and_grad(probe, pairs, g, nullptr);
    };
    const auto result =
        testing::gradcheck(loss_at, flat, nn::pack_params(grads));
    CHECK(result.max_rel_error < 1e-4);
  }
}

TEST_CASE("NLI cross-entropy gradient matches finite differences") {
  auto s = make_entailment(83);
  Vector flat = nn::pack_params(s.params());
  testing::dekink(flat, 97);
  nn::unpack_params(s.params(), flat);

  Rng rng(13);
  std::vector<NliTriple> batch;
  for (int i = 0; i < 3; ++i)
    batch.push_back({random_tokens(rng, 3), random_tokens(rng, 2),
                     static_cast<NliLabel>(i % 3)});

  auto grads = nn::zeros_like(s.params());
  s.loss_and_grad(batch, grads, nullptr);
  auto loss_at = [&](const Vector& v) {
    EntailmentScorer probe = s;
    nn::unpack_params(probe.params(), v);
    auto g = nn::zeros_like(probe.params());
    return probe.loss_and_grad(batch, g, nullptr);
  };
  const auto result = testing::gradcheck(loss_at, flat, nn::pack_params(grads));
  CHECK(result.max_rel_error < 1e-4);
}

TEST_CASE("scorer checkpoints round trip") {
  const std::string path = "test_scorer.ckpt";
  {
    auto s = make_repetition(91);
    s.set_trained(true);
    s.save(path, 1, 2);
    const auto loaded = RepetitionScorer::load(path);
    CHECK(nn::pack_params(loaded.params()) == nn::pack_params(s.params()));
    CHECK(loaded.config().window == s.config().window);
    CHECK(loaded.trained());
  }
  {
    const auto s = make_relevance(92);
    s.save(path, 1, 2);
    const auto loaded = RelevanceScorer::load(path);
    CHECK(nn::pack_params(loaded.params()) == nn::pack_params(s.params()));
  }
  {
    const auto s = make_style(93);
    s.save(path, 1, 2);
    const auto loaded = StyleScorer::load(path);
    CHECK(nn::pack_params(loaded.params()) == nn::pack_params(s.params()));
  }
  {
    const auto s = make_entailment(94);
    s.save(path, 1, 2);
    const auto loaded = EntailmentScorer::load(path);
    CHECK(nn::pack_params(loaded.params()) == nn::pack_params(s.params()));
    CHECK(loaded.terminators() == s.terminators());
  }
  // Kind mismatch is rejected.
  {
    const auto s = make_style(95);
    s.save(path, 1, 2);
    CHECK_THROWS(RepetitionScorer::load(path));
  }
  std::remove(path.c_str());
}
