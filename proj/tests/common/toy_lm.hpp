// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_TESTS_TOY_LM_HPP
#define CHORUS_TESTS_TOY_LM_HPP

#include <functional>
#include <vector>

#include "chorus/nn/functions.hpp"
#include "chorus/scorers/scorer.hpp"
#include "chorus/types.hpp"

namespace chorus::testing {

// Bigram table language model for decoder tests: next-token distribution
// depends only on the previous token. Rows are unnormalized counts.
class CountLm {
 public:
  struct State {
    TokenId last = -1;
  };

  CountLm(Matrix counts, Vector init_counts, TokenId term)
      : term_(term) {
    log_rows_.resize(counts.rows(), counts.cols());
    for (Eigen::Index r = 0; r < counts.rows(); ++r)
      log_rows_.row(r) =
          nn::log_softmax(counts.row(r).transpose().array().log().matrix())
              .transpose();
    init_log_ = nn::log_softmax(init_counts.array().log().matrix());
  }

  int vocab_size() const { return static_cast<int>(init_log_.size()); }
  TokenId term_id() const { return term_; }
  std::vector<TokenId> banned_expansion_ids() const { return {term_}; }

  State context_state(const TokenIds& context) const {
    State s;
    if (!context.empty()) s.last = context.back();
    return s;
  }
  void advance(State& s, TokenId t) const { s.last = t; }
  Vector next_log_probs(const State& s) const {
    if (s.last < 0) return init_log_;
    return log_rows_.row(s.last).transpose();
  }

 private:
  Matrix log_rows_;
  Vector init_log_;
  TokenId term_;
};

// Fixed-behavior scorer for planted decoder/objective experiments.
class FnScorer : public scorers::PrefixScorer {
 public:
  using Fn = std::function<double(const TokenIds&, const TokenIds&)>;
  FnScorer(scorers::ScorerId id, Fn fn) : id_(id), fn_(std::move(fn)) {}

  scorers::ScorerId id() const override { return id_; }
  scorers::ScorerOutput score(const TokenIds& x,
                              const TokenIds& y) const override {
    const double v = fn_(x, y);
    return {v, v};
  }

 private:
  scorers::ScorerId id_;
  Fn fn_;
};

}  // namespace chorus::testing

#endif  // CHORUS_TESTS_TOY_LM_HPP
