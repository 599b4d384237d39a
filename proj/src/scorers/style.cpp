// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/scorers/style.hpp"

#include <stdexcept>

#include <json.hpp>

#include "chorus/io/checkpoint.hpp"
#include "chorus/nn/functions.hpp"
#include "chorus/nn/init.hpp"

namespace chorus::scorers {

std::string StyleConfig::to_json() const {
  nlohmann::ordered_json j;
  j["emb_dim"] = emb_dim;
  j["init_scale"] = init_scale;
  j["dropout"] = dropout;
  j["seed"] = seed;
  return j.dump();
}

StyleConfig StyleConfig::from_json(const std::string& json) {
  const auto j = nlohmann::json::parse(json);
  StyleConfig c;
  c.emb_dim = j.at("emb_dim").get<int>();
  c.init_scale = j.at("init_scale").get<double>();
  c.dropout = j.at("dropout").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

StyleScorer::StyleScorer(int vocab_size, const StyleConfig& config,
                         std::uint64_t vocab_hash)
    : config_(config), vocab_hash_(vocab_hash) {
  Rng rng(config.seed);
  nn::uniform_init(params_.embedding, vocab_size, config.emb_dim, rng,
                   config.init_scale);
  nn::glorot_init(params_.w_read, config.emb_dim, rng);
}

double StyleScorer::train_score(const TokenIds& /*context*/, const TokenIds& y,
                                Cache& cache, Rng* dropout_rng) const {
  if (y.empty()) throw std::invalid_argument("style scorer on an empty prefix");
  const int L = static_cast<int>(y.size());
  const int d = config_.emb_dim;
  cache.tokens = y;
  cache.emb.resize(d, L);
  for (int i = 0; i < L; ++i)
    cache.emb.col(i) =
        params_.embedding.row(y[static_cast<std::size_t>(i)]).transpose();
  if (dropout_rng && config_.dropout > 0.0) {
    const double keep = 1.0 - config_.dropout;
    cache.emb_mask.resize(d, L);
    for (Eigen::Index j = 0; j < cache.emb_mask.cols(); ++j)
      for (Eigen::Index i = 0; i < cache.emb_mask.rows(); ++i)
        cache.emb_mask(i, j) =
            dropout_rng->uniform() < config_.dropout ? 0.0 : 1.0 / keep;
    cache.emb = cache.emb.cwiseProduct(cache.emb_mask);
  }
  cache.argmax.assign(static_cast<std::size_t>(d), 0);
  cache.pooled.resize(d);
  for (int k = 0; k < d; ++k) {
    int best = 0;
    for (int i = 1; i < L; ++i)
      if (cache.emb(k, i) > cache.emb(k, best)) best = i;
    cache.argmax[static_cast<std::size_t>(k)] = best;
    cache.pooled[k] = cache.emb(k, best);
  }
  return params_.w_read.dot(cache.pooled);
}

void StyleScorer::backward(const Cache& cache, double dscore,
                           Params& grads) const {
  grads.w_read += dscore * cache.pooled;
  const int d = config_.emb_dim;
  for (int k = 0; k < d; ++k) {
    const int i = cache.argmax[static_cast<std::size_t>(k)];
    double g = dscore * params_.w_read[k];
    if (cache.emb_mask.size() > 0) g *= cache.emb_mask(k, i);
    grads.embedding(cache.tokens[static_cast<std::size_t>(i)], k) += g;
  }
}

ScorerOutput StyleScorer::score(const TokenIds& context,
                                const TokenIds& prefix) const {
  Cache cache;
  const double raw = train_score(context, prefix, cache, nullptr);
  return {raw, nn::log_sigmoid(raw)};
}

Vector StyleScorer::maxpooled(const TokenIds& y) const {
  Cache cache;
  train_score({}, y, cache, nullptr);
  return cache.pooled;
}

void StyleScorer::save(const std::string& path, std::uint64_t config_hash,
                       std::uint64_t seed) const {
  nlohmann::ordered_json extra;
  extra["config"] = nlohmann::json::parse(config_.to_json());
  extra["vocab_size"] = static_cast<int>(params_.embedding.rows());
  extra["trained"] = trained_;
  io::CheckpointInfo info;
  info.kind = "style";
  info.config_json = extra.dump();
  info.config_hash = config_hash;
  info.seed = seed;
  info.vocab_hash = vocab_hash_;
  io::save_checkpoint(path, info, params_);
}

StyleScorer StyleScorer::load(const std::string& path) {
  const auto info = io::peek_checkpoint(path);
  const auto extra = nlohmann::json::parse(info.config_json);
  StyleScorer s(extra.at("vocab_size").get<int>(),
                StyleConfig::from_json(extra.at("config").dump()),
                info.vocab_hash);
  s.trained_ = extra.at("trained").get<bool>();
  io::load_checkpoint(path, "style", s.params_);
  return s;
}

}  // namespace chorus::scorers
