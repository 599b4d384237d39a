// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_SCORERS_REPETITION_HPP
#define CHORUS_SCORERS_REPETITION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chorus/rng.hpp"
#include "chorus/scorers/scorer.hpp"

namespace chorus::scorers {

struct RepetitionConfig {
  int emb_dim = 64;
  int hidden_dim = 32;
  int window = 8;  // token window for the pairwise similarity score
  double init_scale = 0.05;
  double dropout = 0.5;
  std::uint64_t seed = 1;

  std::string to_json() const;
  static RepetitionConfig from_json(const std::string& json);
};

// Scores a continuation by running a small recurrent aggregator over the
// per-position embedding-similarity profile and squashing a linear readout:
// repeated words push the score towards the RNN-generated class.
// Embeddings stay fixed during training.
class RepetitionScorer : public PrefixScorer {
 public:
  struct Params {
    Matrix embedding;  // V x emb_dim, frozen
    Matrix w_in;       // hidden x 1
    Matrix u_rec;      // hidden x hidden
    Vector b;          // hidden
    Vector w_read;     // hidden

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
      f("w_in", s.w_in);
      f("u_rec", s.u_rec);
      f("b", s.b);
      f("w_read", s.w_read);
    }
  };

  RepetitionScorer() = default;
  RepetitionScorer(int vocab_size, const RepetitionConfig& config,
                   std::uint64_t vocab_hash);

  ScorerId id() const override { return ScorerId::kRepetition; }

  // d_i = max cosine similarity between e(y_i) and the previous `window`
  // embeddings; the empty window at position 1 gets the sentinel -1.
  Vector similarities(const TokenIds& y) const;

  // Sigmoid score in (0, 1); log_prob is its log.
  ScorerOutput score(const TokenIds& context,
                     const TokenIds& prefix) const override;

  struct Cache {
    Vector d;
    std::vector<Vector> hidden;  // h_1..h_n
    Vector read_mask;            // dropout on the readout input
    double sig = 0.0;
  };
  // The value entering the ranking loss (the sigmoid output).
  double train_score(const TokenIds& context, const TokenIds& y, Cache& cache,
                     Rng* dropout_rng) const;
  void backward(const Cache& cache, double dscore, Params& grads) const;

  Params& params() { return params_; }
  const Params& params() const { return params_; }
  const RepetitionConfig& config() const { return config_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  double dropout_rate() const { return config_.dropout; }

  void save(const std::string& path, std::uint64_t config_hash,
            std::uint64_t seed) const;
  static RepetitionScorer load(const std::string& path);

 private:
  Params params_;
  RepetitionConfig config_;
  std::uint64_t vocab_hash_ = 0;
  bool trained_ = false;
};

}  // namespace chorus::scorers

#endif  // CHORUS_SCORERS_REPETITION_HPP
