// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_SCORERS_STYLE_HPP
#define CHORUS_SCORERS_STYLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chorus/rng.hpp"
#include "chorus/scorers/scorer.hpp"

namespace chorus::scorers {

struct StyleConfig {
  int emb_dim = 64;
  double init_scale = 0.05;
  double dropout = 0.5;
  std::uint64_t seed = 1;

  std::string to_json() const;
  static StyleConfig from_json(const std::string& json);
};

// Bag-of-words style model: a linear readout over the dimension-wise max of
// the word embeddings.
class StyleScorer : public PrefixScorer {
 public:
  struct Params {
    Matrix embedding;  // V x emb_dim, fine-tuned
    Vector w_read;     // emb_dim

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
      f("w_read", s.w_read);
    }
  };

  StyleScorer() = default;
  StyleScorer(int vocab_size, const StyleConfig& config,
              std::uint64_t vocab_hash);

  ScorerId id() const override { return ScorerId::kStyle; }

  ScorerOutput score(const TokenIds& context,
                     const TokenIds& prefix) const override;

  Vector maxpooled(const TokenIds& y) const;

  struct Cache {
    TokenIds tokens;
    Matrix emb;       // emb_dim x L after dropout
    Matrix emb_mask;  // empty when dropout disabled
    std::vector<int> argmax;  // per dimension
    Vector pooled;
  };
  double train_score(const TokenIds& context, const TokenIds& y, Cache& cache,
                     Rng* dropout_rng) const;
  void backward(const Cache& cache, double dscore, Params& grads) const;

  Params& params() { return params_; }
  const Params& params() const { return params_; }
  const StyleConfig& config() const { return config_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  double dropout_rate() const { return config_.dropout; }

  void save(const std::string& path, std::uint64_t config_hash,
            std::uint64_t seed) const;
  static StyleScorer load(const std::string& path);

 private:
  Params params_;
  StyleConfig config_;
  std::uint64_t vocab_hash_ = 0;
  bool trained_ = false;
};

}  // namespace chorus::scorers

#endif  // CHORUS_SCORERS_STYLE_HPP
