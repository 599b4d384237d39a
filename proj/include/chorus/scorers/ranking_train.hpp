// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_SCORERS_RANKING_TRAIN_HPP
#define CHORUS_SCORERS_RANKING_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "chorus/corpus/pairs.hpp"
#include "chorus/nn/functions.hpp"
#include "chorus/nn/optim.hpp"
#include "chorus/rng.hpp"

namespace chorus::scorers {

struct RankingTrainConfig {
  double learning_rate = 0.01;  // adaptive-moment optimizer
  int batch_size = 64;
  int epochs = 10;
  std::uint64_t seed = 1;
};

struct RankingTrainReport {
  std::vector<double> epoch_losses;
  double train_accuracy = 0.0;  // fraction of pairs with s(gold) > s(negative)
};

// Mean ranking log loss -log sigmoid(s(gold) - s(negative)) over the given
// pairs, with gradients accumulated via the scorer's train_score/backward
// hooks. Works for any scorer whose train_score is the value entering the
// ranking loss.
template <class S>
double ranking_loss_and_grad(const S& scorer,
                             const std::vector<corpus::RankingPair>& pairs,
                             typename S::Params& grads, Rng* dropout_rng) {
  if (pairs.empty()) throw std::invalid_argument("no ranking pairs");
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(pairs.size());
  for (const auto& pair : pairs) {
    typename S::Cache gold_cache, neg_cache;
    const double s_gold =
        scorer.train_score(pair.context, pair.gold, gold_cache, dropout_rng);
    const double s_neg = scorer.train_score(pair.context, pair.negative,
                                            neg_cache, dropout_rng);
    const double margin = s_gold - s_neg;
    loss -= nn::log_sigmoid(margin) * inv;
    const double dmargin = (nn::sigmoid(margin) - 1.0) * inv;
    scorer.backward(gold_cache, dmargin, grads);
    scorer.backward(neg_cache, -dmargin, grads);
  }
  return loss;
}

template <class S>
double ranking_accuracy(const S& scorer,
                        const std::vector<corpus::RankingPair>& pairs) {
  if (pairs.empty()) return 0.0;
  int wins = 0;
  for (const auto& pair : pairs) {
    typename S::Cache gc, nc;
    const double sg = scorer.train_score(pair.context, pair.gold, gc, nullptr);
    const double sn =
        scorer.train_score(pair.context, pair.negative, nc, nullptr);
    if (sg > sn) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(pairs.size());
}

template <class S>
RankingTrainReport train_ranking_scorer(
    S& scorer, const std::vector<corpus::RankingPair>& pairs,
    const RankingTrainConfig& config) {
  if (pairs.empty()) throw std::invalid_argument("no ranking pairs");
  nn::Adam<typename S::Params> opt(scorer.params(), config.learning_rate);
  Rng shuffle_rng(derive_seed(config.seed, 0x5f1e));
  Rng dropout_rng(derive_seed(config.seed, 0xd0d0));
  const bool dropout = scorer.dropout_rate() > 0.0;

  std::vector<int> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<int>(i);

  auto grads = nn::zeros_like(scorer.params());
  RankingTrainReport report;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(config.batch_size)) {
      std::vector<corpus::RankingPair> batch;
      for (std::size_t i = at;
           i < std::min(order.size(),
                        at + static_cast<std::size_t>(config.batch_size));
           ++i)
        batch.push_back(pairs[static_cast<std::size_t>(order[i])]);
      nn::set_zero(grads);
      const double loss = ranking_loss_and_grad(
          scorer, batch, grads, dropout ? &dropout_rng : nullptr);
      if (!std::isfinite(loss))
        throw std::runtime_error("ranking training diverged");
      opt.step(scorer.params(), grads);
      epoch_loss += loss;
      ++batches;
    }
    report.epoch_losses.push_back(epoch_loss / std::max(1, batches));
  }
  report.train_accuracy = ranking_accuracy(scorer, pairs);
  scorer.set_trained(true);
  return report;
}

}  // namespace chorus::scorers

#endif  // CHORUS_SCORERS_RANKING_TRAIN_HPP
