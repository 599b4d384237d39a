// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_DECODING_BEAM_HPP
#define CHORUS_DECODING_BEAM_HPP

#include <algorithm>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "chorus/objective/objective.hpp"
#include "chorus/rng.hpp"
#include "chorus/types.hpp"

namespace chorus::decoding {

struct BeamConfig {
  int beam_size = 10;
  double temperature = 1.8;  // 0 selects deterministically by score
  int max_steps = 150;
  int target_sentences = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (beam_size < 1) throw std::invalid_argument("beam size must be >= 1");
    if (temperature < 0.0)
      throw std::invalid_argument("temperature must be >= 0");
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (target_sentences < 1)
      throw std::invalid_argument("target sentence count must be >= 1");
  }
};

// A partial continuation in the beam. The composite score is recomputed from
// the full prefix at every step, never accumulated; boundary-only scorer
// values are carried between sentence terminators.
template <class Lm>
struct Hypothesis {
  TokenIds continuation;
  typename Lm::State state;  // language-model state at the end of the prefix
  double lm_logprob = 0.0;   // log P_lm(continuation | context)
  Vector scorer_values;      // log-prob form per active scorer
  double score = 0.0;        // composite of the current prefix
  int sentences_done = 0;
  bool finished = false;
};

// Expansion child before its LM state is materialized.
struct Candidate {
  int parent = 0;
  TokenId token = 0;
  double token_logprob = 0.0;
  double lm_logprob = 0.0;
  Vector scorer_values;
  double score = 0.0;
  int sentences_done = 0;
};

struct StepTrace {
  int step = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> beam_scores;
};

struct GenerationResult {
  TokenIds continuation;  // context stripped, no termination symbol
  double score = -std::numeric_limits<double>::infinity();
  bool warning = false;  // no hypothesis finished within max_steps
  int steps_taken = 0;
  std::vector<StepTrace> trace;
  Vector final_scorer_values;
  double final_lm_logprob = 0.0;
};

// Top-k next tokens per hypothesis by LM log-probability; ties prefer the
// lower token id. Structural symbols (begin/pad/termination) are not
// expanded; termination is handled by the termination score.
template <class Lm>
std::vector<Candidate> expand_hypotheses(
    const std::vector<Hypothesis<Lm>>& beam,
    const std::vector<Vector>& beam_log_probs, int k,
    const std::vector<TokenId>& banned,
    const std::vector<TokenId>& sentence_terminators) {
  std::vector<Candidate> candidates;
  candidates.reserve(beam.size() * static_cast<std::size_t>(k));
  for (std::size_t h = 0; h < beam.size(); ++h) {
    const Vector& lp = beam_log_probs[h];
    std::vector<TokenId> order(static_cast<std::size_t>(lp.size()));
    std::iota(order.begin(), order.end(), 0);
    for (TokenId b : banned)
      order.erase(std::remove(order.begin(), order.end(), b), order.end());
    const std::size_t keep =
        std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    std::partial_sort(order.begin(),
                      order.begin() + static_cast<std::ptrdiff_t>(keep),
                      order.end(), [&](TokenId a, TokenId b) {
                        if (lp[a] != lp[b]) return lp[a] > lp[b];
                        return a < b;
                      });
    for (std::size_t i = 0; i < keep; ++i) {
      const TokenId t = order[i];
      Candidate c;
      c.parent = static_cast<int>(h);
      c.token = t;
      c.token_logprob = lp[t];
      c.lm_logprob = beam[h].lm_logprob + lp[t];
      c.sentences_done =
          beam[h].sentences_done +
          (std::find(sentence_terminators.begin(), sentence_terminators.end(),
                     t) != sentence_terminators.end()
               ? 1
               : 0);
      candidates.push_back(std::move(c));
    }
  }
  return candidates;
}

// Draws k distinct candidates with probability proportional to
// exp(score / temperature); temperature zero picks the top k by score with
// ties broken by token id, then candidate index. Returns indices into
// `candidates`.
inline std::vector<int> sample_next_beam(const std::vector<double>& scores,
                                         const std::vector<TokenId>& tokens,
                                         int k, double temperature, Rng& rng) {
  const int n = static_cast<int>(scores.size());
  if (n < k) throw std::invalid_argument("fewer candidates than beam slots");
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  if (temperature <= 0.0) {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto sa = scores[static_cast<std::size_t>(a)];
      const auto sb = scores[static_cast<std::size_t>(b)];
      if (sa != sb) return sa > sb;
      const auto ta = tokens[static_cast<std::size_t>(a)];
      const auto tb = tokens[static_cast<std::size_t>(b)];
      if (ta != tb) return ta < tb;
      return a < b;
    });
    order.resize(static_cast<std::size_t>(k));
    return order;
  }

  double max_score = -std::numeric_limits<double>::infinity();
  for (double s : scores) max_score = std::max(max_score, s);
  std::vector<double> weight(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    weight[static_cast<std::size_t>(i)] =
        std::exp((scores[static_cast<std::size_t>(i)] - max_score) /
                 temperature);

  std::vector<int> picked;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int round = 0; round < k; ++round) {
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      if (!used[static_cast<std::size_t>(i)])
        total += weight[static_cast<std::size_t>(i)];
    int chosen = -1;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        acc += weight[static_cast<std::size_t>(i)];
        if (u < acc) {
          chosen = i;
          break;
        }
        chosen = i;  // guards against roundoff at the upper edge
      }
    } else {
      // All remaining weights underflowed; fall back to the best remaining
      // score deterministically.
      for (int i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        if (chosen < 0 ||
            scores[static_cast<std::size_t>(i)] >
                scores[static_cast<std::size_t>(chosen)] ||
            (scores[static_cast<std::size_t>(i)] ==
                 scores[static_cast<std::size_t>(chosen)] &&
             tokens[static_cast<std::size_t>(i)] <
                 tokens[static_cast<std::size_t>(chosen)]))
          chosen = i;
      }
    }
    used[static_cast<std::size_t>(chosen)] = true;
    picked.push_back(chosen);
  }
  return picked;
}

template <class Lm>
class BeamSearch {
 public:
  BeamSearch(const objective::CompositeObjective<Lm>& objective,
             const BeamConfig& config,
             std::vector<TokenId> sentence_terminators)
      : objective_(objective),
        config_(config),
        terminators_(std::move(sentence_terminators)) {
    config_.validate();
    objective_.validate();
  }

  GenerationResult generate(const TokenIds& context) const {
    return generate(context, config_.seed);
  }

  GenerationResult generate(const TokenIds& context, std::uint64_t seed) const;

  // Composite score of the hypothesis with the termination symbol appended:
  // the LM adds log P(term | prefix); boundary-only scorers carry their
  // value, the rest are evaluated on the terminated prefix.
  double termination_score(const TokenIds& context,
                           const Hypothesis<Lm>& hyp) const {
    const Vector lp = objective_.lm->next_log_probs(hyp.state);
    return termination_score_with(context, hyp, lp, nullptr);
  }

 private:
  struct BestSlot {
    bool set = false;
    double score = -std::numeric_limits<double>::infinity();
    TokenIds continuation;
    Vector scorer_values;
    double lm_logprob = 0.0;
  };

  using Caches =
      std::vector<std::unique_ptr<scorers::PrefixScorer::ContextCache>>;

  bool is_terminator(TokenId t) const {
    return std::find(terminators_.begin(), terminators_.end(), t) !=
           terminators_.end();
  }

  Vector prefix_scorer_values(const TokenIds& context, const TokenIds& prefix,
                              const Vector& parent_values, bool at_boundary,
                              const Caches* caches) const {
    const auto& set = objective_.scorer_set;
    Vector v(static_cast<Eigen::Index>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i]->boundary_only() && !at_boundary) {
        v[static_cast<Eigen::Index>(i)] =
            parent_values[static_cast<Eigen::Index>(i)];
      } else {
        const auto* cache =
            caches ? (*caches)[i].get() : nullptr;
        v[static_cast<Eigen::Index>(i)] =
            set[i]->score_prepared(cache, context, prefix).log_prob;
      }
    }
    return v;
  }

  double termination_score_with(const TokenIds& context,
                                const Hypothesis<Lm>& hyp,
                                const Vector& log_probs,
                                const Caches* caches) const {
    TokenIds terminated = hyp.continuation;
    terminated.push_back(objective_.lm->term_id());
    const Vector values = prefix_scorer_values(
        context, terminated, hyp.scorer_values, /*at_boundary=*/false, caches);
    double score = hyp.lm_logprob + log_probs[objective_.lm->term_id()];
    if (values.size() > 0) score += objective_.weights.values.dot(values);
    return score;
  }

  objective::CompositeObjective<Lm> objective_;
  BeamConfig config_;
  std::vector<TokenId> terminators_;
};

template <class Lm>
GenerationResult BeamSearch<Lm>::generate(const TokenIds& context,
                                          std::uint64_t seed) const {
  const Lm& lm = *objective_.lm;
  const int k = config_.beam_size;
  const auto n_scorers =
      static_cast<Eigen::Index>(objective_.scorer_set.size());
  Rng rng(seed);

  Caches caches;
  for (const auto* s : objective_.scorer_set)
    caches.push_back(s->prepare_context(context));

  std::vector<Hypothesis<Lm>> beam(1);
  beam[0].state = lm.context_state(context);
  beam[0].scorer_values = Vector::Zero(n_scorers);

  const std::vector<TokenId> banned = lm.banned_expansion_ids();

  BestSlot best_any;       // Algorithm-style running best at clean boundaries
  BestSlot best_finished;  // completed the target sentence count
  GenerationResult result;

  auto consider = [&](BestSlot& slot, double score, const TokenIds& cont,
                      const Vector& values, double lm_lp) {
    if (!slot.set || score > slot.score) {
      slot.set = true;
      slot.score = score;
      slot.continuation = cont;
      slot.scorer_values = values;
      slot.lm_logprob = lm_lp;
    }
  };

  int step = 0;
  for (; step < config_.max_steps; ++step) {
    // Termination-score pass over the current beam.
    std::vector<Vector> log_probs(beam.size());
    double max_ts = -std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < beam.size(); ++h) {
      log_probs[h] = lm.next_log_probs(beam[h].state);
      const double ts =
          termination_score_with(context, beam[h], log_probs[h], &caches);
      max_ts = std::max(max_ts, ts);
      // Only prefixes ending at a sentence boundary become best candidates;
      // terminating mid-sentence would emit a dangling fragment.
      if (!beam[h].continuation.empty() &&
          is_terminator(beam[h].continuation.back())) {
        consider(best_any, ts, beam[h].continuation, beam[h].scorer_values,
                 beam[h].lm_logprob);
      }
    }
    if (best_finished.set && max_ts < best_finished.score) break;

    // Expand and score with the full objective.
    std::vector<Candidate> candidates = expand_hypotheses(
        beam, log_probs, k, banned, terminators_);
    if (candidates.empty()) break;

    std::vector<int> pool;
    bool finished_this_step = false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      Candidate& cand = candidates[c];
      const auto& parent = beam[static_cast<std::size_t>(cand.parent)];
      TokenIds prefix = parent.continuation;
      prefix.push_back(cand.token);
      const bool boundary = is_terminator(cand.token);
      cand.scorer_values = prefix_scorer_values(
          context, prefix, parent.scorer_values, boundary, &caches);
      cand.score = cand.lm_logprob;
      if (n_scorers > 0)
        cand.score += objective_.weights.values.dot(cand.scorer_values);

      if (cand.sentences_done >= config_.target_sentences) {
        // Finalize: score once more with the termination symbol; the
        // hypothesis is not re-expanded.
        typename Lm::State state = parent.state;
        lm.advance(state, cand.token);
        Hypothesis<Lm> done;
        done.continuation = prefix;
        done.state = std::move(state);
        done.lm_logprob = cand.lm_logprob;
        done.scorer_values = cand.scorer_values;
        done.sentences_done = cand.sentences_done;
        const Vector term_lp = lm.next_log_probs(done.state);
        const double ts =
            termination_score_with(context, done, term_lp, &caches);
        consider(best_finished, ts, done.continuation, done.scorer_values,
                 done.lm_logprob);
        consider(best_any, ts, done.continuation, done.scorer_values,
                 done.lm_logprob);
        finished_this_step = true;
      } else {
        pool.push_back(static_cast<int>(c));
      }
    }

    StepTrace trace;
    trace.step = step;
    trace.best_score = std::max(best_any.score, best_finished.score);

    if (finished_this_step || pool.empty()) {
      result.trace.push_back(std::move(trace));
      ++step;
      break;
    }

    // Sample the next beam from the candidate pool.
    std::vector<double> pool_scores;
    std::vector<TokenId> pool_tokens;
    for (int idx : pool) {
      pool_scores.push_back(candidates[static_cast<std::size_t>(idx)].score);
      pool_tokens.push_back(candidates[static_cast<std::size_t>(idx)].token);
    }
    const int take = std::min<int>(k, static_cast<int>(pool.size()));
    const std::vector<int> picked =
        sample_next_beam(pool_scores, pool_tokens, take, config_.temperature,
                         rng);

    std::vector<Hypothesis<Lm>> next_beam;
    next_beam.reserve(picked.size());
    for (int p : picked) {
      const Candidate& cand =
          candidates[static_cast<std::size_t>(pool[static_cast<std::size_t>(p)])];
      const auto& parent = beam[static_cast<std::size_t>(cand.parent)];
      Hypothesis<Lm> h;
      h.continuation = parent.continuation;
      h.continuation.push_back(cand.token);
      h.state = parent.state;
      lm.advance(h.state, cand.token);
      h.lm_logprob = cand.lm_logprob;
      h.scorer_values = cand.scorer_values;
      h.score = cand.score;
      h.sentences_done = cand.sentences_done;
      next_beam.push_back(std::move(h));
      trace.beam_scores.push_back(cand.score);
    }
    result.trace.push_back(std::move(trace));
    beam = std::move(next_beam);
  }

  result.steps_taken = step;
  const BestSlot* chosen = nullptr;
  if (best_finished.set) {
    chosen = &best_finished;
  } else if (best_any.set) {
    chosen = &best_any;
    result.warning = true;
  }
  if (chosen) {
    result.continuation = chosen->continuation;
    result.score = chosen->score;
    result.final_scorer_values = chosen->scorer_values;
    result.final_lm_logprob = chosen->lm_logprob;
    return result;
  }

  // Nothing reached a clean stopping point: force-terminate the best-scoring
  // beam hypothesis.
  result.warning = true;
  const Hypothesis<Lm>* best_hyp = &beam[0];
  for (const auto& h : beam)
    if (h.score > best_hyp->score) best_hyp = &h;
  result.continuation = best_hyp->continuation;
  const Vector lp = lm.next_log_probs(best_hyp->state);
  result.score = termination_score_with(context, *best_hyp, lp, &caches);
  result.final_scorer_values = best_hyp->scorer_values;
  result.final_lm_logprob = best_hyp->lm_logprob;
  return result;
}

}  // namespace chorus::decoding

#endif  // CHORUS_DECODING_BEAM_HPP
