// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_SCORERS_ENTAILMENT_HPP
#define CHORUS_SCORERS_ENTAILMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chorus/corpus/nli_gen.hpp"
#include "chorus/rng.hpp"
#include "chorus/scorers/scorer.hpp"

namespace chorus::scorers {

struct EntailmentConfig {
  int emb_dim = 64;
  int proj_dim = 200;    // embeddings are projected to this size
  int hidden_dim = 200;  // attend/compare/aggregate feed-forward width
  double init_scale = 0.05;
  double dropout = 0.2;  // on the MLP hidden layers
  std::uint64_t seed = 1;

  std::string to_json() const;
  static EntailmentConfig from_json(const std::string& json);
};

// Sentence-pair classifier (attend / compare / aggregate, no intra-sentence
// attention) over {contradiction, entailment, neutral}. The decoding score
// of a continuation is the minimum neutral log-probability of its last
// complete sentence against every preceding sentence; it only changes at
// sentence boundaries.
class EntailmentScorer : public PrefixScorer {
 public:
  struct Params {
    Matrix embedding;          // V x emb_dim, fine-tuned
    Matrix proj;               // proj_dim x emb_dim
    Matrix f_w1, f_w2;         // attend MLP
    Vector f_b1, f_b2;
    Matrix g_w1, g_w2;         // compare MLP (input 2 * proj_dim)
    Vector g_b1, g_b2;
    Matrix h_w1, h_w2;         // aggregate MLP (input 2 * hidden_dim)
    Vector h_b1, h_b2;
    Matrix out_w;              // 3 x hidden_dim
    Vector out_b;              // 3

    template <class F>
    void visit_params(F&& f) {
      visit_impl(*this, f);
    }
    template <class F>
    void visit_params(F&& f) const {
      visit_impl(*this, f);
    }

   private:
    template <class Self, class F>
    static void visit_impl(Self& s, F& f) {
      f("embedding", s.embedding);
      f("proj", s.proj);
      f("f_w1", s.f_w1);
      f("f_b1", s.f_b1);
      f("f_w2", s.f_w2);
      f("f_b2", s.f_b2);
      f("g_w1", s.g_w1);
      f("g_b1", s.g_b1);
      f("g_w2", s.g_w2);
      f("g_b2", s.g_b2);
      f("h_w1", s.h_w1);
      f("h_b1", s.h_b1);
      f("h_w2", s.h_w2);
      f("h_b2", s.h_b2);
      f("out_w", s.out_w);
      f("out_b", s.out_b);
    }
  };

  EntailmentScorer() = default;
  EntailmentScorer(int vocab_size, const EntailmentConfig& config,
                   std::uint64_t vocab_hash,
                   std::vector<TokenId> terminator_ids);

  ScorerId id() const override { return ScorerId::kEntailment; }
  bool boundary_only() const override { return true; }

  // Probabilities (contradiction, entailment, neutral), summing to one.
  Vector nli_classify(const TokenIds& premise, const TokenIds& hypothesis) const;

  // Neutral-class log-probability of the pair.
  double neutral_logprob(const TokenIds& premise,
                         const TokenIds& hypothesis) const;

  // Minimum neutral log-probability of the last complete sentence of
  // `prefix` against all preceding complete sentences in context and prefix;
  // 0 while no sentence of the prefix is complete.
  ScorerOutput score(const TokenIds& context,
                     const TokenIds& prefix) const override;

  struct Cache;  // opaque forward cache for training
  double loss_and_grad(const std::vector<corpus::NliTriple>& batch,
                       Params& grads, Rng* dropout_rng) const;

  Params& params() { return params_; }
  const Params& params() const { return params_; }
  const EntailmentConfig& config() const { return config_; }
  const std::vector<TokenId>& terminators() const { return terminators_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }

  void save(const std::string& path, std::uint64_t config_hash,
            std::uint64_t seed) const;
  static EntailmentScorer load(const std::string& path);

 private:
  bool is_terminator(TokenId id) const;
  std::vector<TokenIds> complete_sentences(const TokenIds& tokens) const;

  Params params_;
  EntailmentConfig config_;
  std::vector<TokenId> terminators_;
  std::uint64_t vocab_hash_ = 0;
  bool trained_ = false;
};

struct NliTrainConfig {
  double learning_rate = 1.0;  // AdaGrad
  int batch_size = 16;
  int epochs = 10;
  double grad_clip = 5.0;  // global norm
  std::uint64_t seed = 1;
};

struct NliTrainReport {
  std::vector<double> epoch_losses;
  double train_accuracy = 0.0;
};

// Cross-entropy training with AdaGrad. Rejects inputs covering fewer than
// two label classes; throws on non-finite loss.
NliTrainReport train_nli(EntailmentScorer& scorer,
                         const std::vector<corpus::NliTriple>& triples,
                         const NliTrainConfig& config);

double nli_accuracy(const EntailmentScorer& scorer,
                    const std::vector<corpus::NliTriple>& triples);

}  // namespace chorus::scorers

#endif  // CHORUS_SCORERS_ENTAILMENT_HPP
