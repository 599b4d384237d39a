// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_LM_TRAIN_HPP
#define CHORUS_LM_TRAIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chorus/lm/model.hpp"

namespace chorus::lm {

struct LmTrainConfig {
  double learning_rate = 1.0;
  double anneal_factor = 0.5;  // applied when validation perplexity stalls
  int batch_size = 16;
  int bptt_len = 35;       // gradients truncated after this many steps
  double grad_clip = 0.25;  // global norm
  double dropout = 0.2;     // on first-layer outputs
  int check_interval = 50;  // batches between validation checks
  int epochs = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct LmValidationCheck {
  int batch = 0;
  double train_loss = 0.0;  // running mean NLL since the previous check
  double valid_perplexity = 0.0;
  double learning_rate = 0.0;
};

struct LmTrainReport {
  std::vector<LmValidationCheck> checks;
  double final_valid_perplexity = 0.0;
};

// Mean per-token NLL of one truncated-BPTT chunk, with gradients accumulated
// into `grads`. inputs/targets are [step][column]; hidden states are carried
// in and out (detached between chunks). dropout_rng == nullptr disables
// dropout.
double lm_loss_and_grad(const LanguageModel& model,
                        const std::vector<TokenIds>& inputs,
                        const std::vector<TokenIds>& targets, Matrix& h1,
                        Matrix& h2, LmParams& grads, double dropout_rate,
                        Rng* dropout_rng);

// Mini-batch SGD over a token stream with learning-rate annealing on
// validation stagnation. Deterministic given config.seed. Throws on
// divergence (non-finite loss or perplexity).
// initial_embedding, when given, replaces the random embedding init (e.g.
// rows loaded from a pre-trained vector file).
LanguageModel train_lm(const TokenIds& train_stream,
                       const TokenIds& valid_stream,
                       const std::vector<std::int64_t>& freq_by_id,
                       int vocab_size, const LmConfig& model_config,
                       const LmTrainConfig& train_config,
                       std::uint64_t vocab_hash,
                       LmTrainReport* report = nullptr,
                       const Matrix* initial_embedding = nullptr);

}  // namespace chorus::lm

#endif  // CHORUS_LM_TRAIN_HPP
