// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_SCORERS_RELEVANCE_HPP
#define CHORUS_SCORERS_RELEVANCE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "chorus/rng.hpp"
#include "chorus/scorers/scorer.hpp"

namespace chorus::scorers {

struct RelevanceConfig {
  int emb_dim = 64;
  int filters = 32;
  int filter_width = 3;  // stride 1, zero padding keeps the length
  double init_scale = 0.05;
  double dropout = 0.5;
  std::uint64_t seed = 1;

  std::string to_json() const;
  static RelevanceConfig from_json(const std::string& json);
};

// Context and continuation each pass through a one-dimensional convolution
// and maxpooling; their elementwise product is read out linearly, so shared
// semantic dimensions amplify the score.
class RelevanceScorer : public PrefixScorer {
 public:
  struct Params {
    Matrix embedding;      // V x emb_dim, fine-tuned
    Matrix conv_ctx;       // filters x (width * emb_dim)
    Vector conv_ctx_bias;  // filters
    Matrix conv_cont;      // filters x (width * emb_dim)
    Vector conv_cont_bias;
    Vector w_read;  // filters

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
      f("conv_ctx", s.conv_ctx);
      f("conv_ctx_bias", s.conv_ctx_bias);
      f("conv_cont", s.conv_cont);
      f("conv_cont_bias", s.conv_cont_bias);
      f("w_read", s.w_read);
    }
  };

  RelevanceScorer() = default;
  RelevanceScorer(int vocab_size, const RelevanceConfig& config,
                  std::uint64_t vocab_hash);

  ScorerId id() const override { return ScorerId::kRelevance; }

  // Raw is the unbounded readout; log_prob its log-sigmoid.
  ScorerOutput score(const TokenIds& context,
                     const TokenIds& prefix) const override;

  std::unique_ptr<ContextCache> prepare_context(
      const TokenIds& context) const override;
  ScorerOutput score_prepared(const ContextCache* cache,
                              const TokenIds& context,
                              const TokenIds& prefix) const override;

  struct SideCache {
    TokenIds tokens;
    Matrix emb;       // emb_dim x L after input dropout
    Matrix emb_mask;  // empty when dropout disabled
    Matrix conv_out;  // filters x L
    std::vector<int> argmax;  // per filter
    Vector pooled;            // after pool dropout
    Vector pool_mask;
  };
  struct Cache {
    SideCache ctx, cont;
  };
  double train_score(const TokenIds& context, const TokenIds& y, Cache& cache,
                     Rng* dropout_rng) const;
  void backward(const Cache& cache, double dscore, Params& grads) const;

  // Maxpooled convolution of one side; exposed for unit checks.
  Vector pooled_context(const TokenIds& context) const;
  Vector pooled_continuation(const TokenIds& prefix) const;

  Params& params() { return params_; }
  const Params& params() const { return params_; }
  const RelevanceConfig& config() const { return config_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }
  double dropout_rate() const { return config_.dropout; }

  void save(const std::string& path, std::uint64_t config_hash,
            std::uint64_t seed) const;
  static RelevanceScorer load(const std::string& path);

 private:
  struct PooledContext : ContextCache {
    Vector pooled;
  };
  void side_forward(const TokenIds& tokens, const Matrix& conv,
                    const Vector& bias, SideCache& cache,
                    Rng* dropout_rng) const;
  void side_backward(const SideCache& cache, const Matrix& conv,
                     const Vector& dpooled, Matrix& dconv, Vector& dbias,
                     Matrix& dembedding) const;

  Params params_;
  RelevanceConfig config_;
  std::uint64_t vocab_hash_ = 0;
  bool trained_ = false;
};

}  // namespace chorus::scorers

#endif  // CHORUS_SCORERS_RELEVANCE_HPP
