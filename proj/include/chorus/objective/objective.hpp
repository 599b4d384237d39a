// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_OBJECTIVE_OBJECTIVE_HPP
#define CHORUS_OBJECTIVE_OBJECTIVE_HPP

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chorus/rng.hpp"
#include "chorus/scorers/scorer.hpp"
#include "chorus/types.hpp"

namespace chorus::objective {

// Learned coefficients combining scorer log-probabilities with the language
// model into the decoding objective. Unconstrained in sign.
struct MixtureWeights {
  std::vector<scorers::ScorerId> ids;
  Vector values;

  static MixtureWeights uniform(const std::vector<scorers::ScorerId>& ids,
                                double value = 1.0);

  int index_of(scorers::ScorerId id) const;
  double value_of(scorers::ScorerId id) const;

  void save(const std::string& path, std::uint64_t config_hash,
            std::uint64_t seed, std::uint64_t vocab_hash) const;

  struct LoadResult;
  static LoadResult load(const std::string& path);
};

struct MixtureWeights::LoadResult {
  MixtureWeights weights;
  std::uint64_t vocab_hash = 0;
};

// f(x, y) = log P_lm(y | x) + sum_k lambda_k * s_k(x, y). The Lm type only
// needs context_state / advance / next_log_probs, so toy models plug in for
// tests.
template <class Lm>
struct CompositeObjective {
  const Lm* lm = nullptr;
  std::vector<const scorers::PrefixScorer*> scorer_set;
  MixtureWeights weights;

  void validate() const {
    if (!lm) throw std::invalid_argument("objective has no language model");
    if (weights.ids.size() != scorer_set.size())
      throw std::invalid_argument("one weight per active scorer required");
    for (std::size_t i = 0; i < scorer_set.size(); ++i)
      if (weights.ids[i] != scorer_set[i]->id())
        throw std::invalid_argument("weight/scorer order mismatch");
  }
};

template <class Lm>
CompositeObjective<Lm> make_objective(
    const Lm& lm, const std::vector<const scorers::PrefixScorer*>& scorer_set,
    double initial_weight = 1.0) {
  CompositeObjective<Lm> obj;
  obj.lm = &lm;
  obj.scorer_set = scorer_set;
  std::vector<scorers::ScorerId> ids;
  for (const auto* s : scorer_set) ids.push_back(s->id());
  obj.weights = MixtureWeights::uniform(ids, initial_weight);
  return obj;
}

// log P_lm(y | x): per-token conditionals accumulated after consuming the
// context.
template <class Lm>
double continuation_logprob(const Lm& lm, const TokenIds& context,
                            const TokenIds& continuation) {
  auto state = lm.context_state(context);
  double total = 0.0;
  for (TokenId t : continuation) {
    total += lm.next_log_probs(state)[t];
    lm.advance(state, t);
  }
  return total;
}

// Per-scorer log-probability-form values on (x, y), in scorer-set order.
template <class Lm>
Vector scorer_values(const CompositeObjective<Lm>& objective,
                     const TokenIds& context, const TokenIds& y) {
  Vector v(static_cast<Eigen::Index>(objective.scorer_set.size()));
  for (std::size_t i = 0; i < objective.scorer_set.size(); ++i)
    v[static_cast<Eigen::Index>(i)] =
        objective.scorer_set[i]->score(context, y).log_prob;
  return v;
}

template <class Lm>
double composite_score(const CompositeObjective<Lm>& objective,
                       const TokenIds& context, const TokenIds& y) {
  objective.validate();
  double total = continuation_logprob(*objective.lm, context, y);
  if (!objective.scorer_set.empty())
    total += objective.weights.values.dot(scorer_values(objective, context, y));
  return total;
}

struct WeightExample {
  TokenIds context;
  TokenIds continuation;
};

struct MixtureTracePoint {
  int step = 0;
  double loss = 0.0;
  Vector lambda;
};

struct MixtureLearnReport {
  MixtureWeights weights;
  std::vector<MixtureTracePoint> trace;
};

struct MixtureLearnConfig {
  double learning_rate = 0.01;
  int epochs = 1;
  std::uint64_t seed = 1;
};

// Online mixture-weight learning: each generation uses the current lambda,
// then one gradient step shrinks the squared gap between the objective on
// the gold continuation and on the generation. Scorer values are constants
// in lambda, so the per-coordinate gradient
//   2 * (f(x,y) - f(x,yhat)) * (s_k(x,y) - s_k(x,yhat))
// is exact; the LM term cancels. Lambda starts uniform at 1.
template <class Lm, class DecodeFn>
MixtureLearnReport learn_mixture_weights(
    CompositeObjective<Lm>& objective,
    const std::vector<WeightExample>& examples, DecodeFn&& decode,
    const MixtureLearnConfig& config) {
  objective.validate();
  if (examples.empty())
    throw std::invalid_argument("no mixture-weight training examples");
  objective.weights =
      MixtureWeights::uniform(objective.weights.ids, 1.0);

  MixtureLearnReport report;
  int step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& ex : examples) {
      const TokenIds generated =
          decode(ex.context, objective,
                 derive_seed(config.seed, static_cast<std::uint64_t>(epoch),
                             static_cast<std::uint64_t>(step)));
      const Vector s_gold =
          scorer_values(objective, ex.context, ex.continuation);
      const Vector s_gen = scorer_values(objective, ex.context, generated);
      const double lm_gold =
          continuation_logprob(*objective.lm, ex.context, ex.continuation);
      const double lm_gen =
          continuation_logprob(*objective.lm, ex.context, generated);
      const double residual = (lm_gold - lm_gen) +
                              objective.weights.values.dot(s_gold - s_gen);
      const double loss = residual * residual;
      if (!std::isfinite(loss))
        throw std::runtime_error("mixture-weight learning diverged");
      const Vector grad = 2.0 * residual * (s_gold - s_gen);
      objective.weights.values -= config.learning_rate * grad;

      MixtureTracePoint point;
      point.step = step++;
      point.loss = loss;
      point.lambda = objective.weights.values;
      report.trace.push_back(std::move(point));
    }
  }
  report.weights = objective.weights;
  return report;
}

}  // namespace chorus::objective

#endif  // CHORUS_OBJECTIVE_OBJECTIVE_HPP
