// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_LM_MODEL_HPP
#define CHORUS_LM_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chorus/lm/adaptive_softmax.hpp"
#include "chorus/lm/gru.hpp"
#include "chorus/rng.hpp"
#include "chorus/types.hpp"

namespace chorus::lm {

struct LmConfig {
  int emb_dim = 64;
  int hidden_dim = 128;
  int num_clusters = 3;
  double init_scale = 0.05;
  std::uint64_t seed = 1;

  std::string to_json() const;
  static LmConfig from_json(const std::string& json);
};

// Input embedding and output projection share the embedding matrix; the
// recurrent stack is two gated layers; the output layer is a clustered
// softmax over frequency bands.
struct LmParams {
  Matrix embedding;     // V x emb_dim, tied input/output
  GruLayer gru1, gru2;  // emb->hidden, hidden->hidden
  Matrix out_proj;      // emb_dim x hidden
  Vector out_bias;      // V
  Matrix cluster_proj;  // k x emb_dim
  Vector cluster_bias;  // k

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
    f("gru1.w_reset", s.gru1.w_reset);
    f("gru1.u_reset", s.gru1.u_reset);
    f("gru1.w_update", s.gru1.w_update);
    f("gru1.u_update", s.gru1.u_update);
    f("gru1.w_cand", s.gru1.w_cand);
    f("gru1.u_cand", s.gru1.u_cand);
    f("gru1.b_reset", s.gru1.b_reset);
    f("gru1.b_update", s.gru1.b_update);
    f("gru1.b_cand", s.gru1.b_cand);
    f("gru2.w_reset", s.gru2.w_reset);
    f("gru2.u_reset", s.gru2.u_reset);
    f("gru2.w_update", s.gru2.w_update);
    f("gru2.u_update", s.gru2.u_update);
    f("gru2.w_cand", s.gru2.w_cand);
    f("gru2.u_cand", s.gru2.u_cand);
    f("gru2.b_reset", s.gru2.b_reset);
    f("gru2.b_update", s.gru2.b_update);
    f("gru2.b_cand", s.gru2.b_cand);
    f("out_proj", s.out_proj);
    f("out_bias", s.out_bias);
    f("cluster_proj", s.cluster_proj);
    f("cluster_bias", s.cluster_bias);
  }
};

struct LmState {
  Vector h1, h2;
};

class LanguageModel {
 public:
  using State = LmState;

  // Special token ids follow the corpus vocabulary layout.
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kBos = 2;
  static constexpr TokenId kTerm = 3;

  LanguageModel() = default;
  LanguageModel(int vocab_size, const std::vector<std::int64_t>& freq_by_id,
                const LmConfig& config, std::uint64_t vocab_hash);

  int vocab_size() const { return static_cast<int>(params_.out_bias.size()); }
  TokenId term_id() const { return kTerm; }
  // Structural symbols the decoder never expands.
  std::vector<TokenId> banned_expansion_ids() const {
    return {kPad, kBos, kTerm};
  }
  const LmConfig& config() const { return config_; }
  const ClusterPartition& partition() const { return partition_; }
  LmParams& params() { return params_; }
  const LmParams& params() const { return params_; }
  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }

  // State after consuming the begin symbol; next_log_probs() on it gives the
  // distribution of the first token.
  LmState initial_state() const;
  void advance(LmState& state, TokenId token) const;
  LmState context_state(const TokenIds& context) const;
  Vector next_log_probs(const LmState& state) const;

  // Distribution over the next token after `prefix`. Throws on ids outside
  // the vocabulary.
  Vector next_token_logprobs(const TokenIds& prefix) const;

  // Sum of per-position conditional log-probabilities.
  double sequence_logprob(const TokenIds& sequence) const;

  // Temperature sampling until the termination symbol or max_tokens.
  TokenIds sample_continuation(const TokenIds& context, int max_tokens,
                               double temperature, std::uint64_t seed) const;
  // As above but with some ids excluded from sampling (used when negatives
  // must reach an exact length and the termination symbol would cut them
  // short).
  TokenIds sample_continuation(const TokenIds& context, int max_tokens,
                               double temperature, std::uint64_t seed,
                               const std::vector<TokenId>& banned) const;

  // exp(-mean per-token log-probability) over a token stream.
  double perplexity(const TokenIds& stream) const;

  void save(const std::string& path, std::uint64_t config_hash,
            std::uint64_t seed) const;
  static LanguageModel load(const std::string& path);

 private:
  void check_token(TokenId id) const;

  LmParams params_;
  ClusterPartition partition_;
  LmConfig config_;
  std::uint64_t vocab_hash_ = 0;
  bool trained_ = false;
};

}  // namespace chorus::lm

#endif  // CHORUS_LM_MODEL_HPP
