// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/scorers/relevance.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

#include <json.hpp>

#include "chorus/io/checkpoint.hpp"
#include "chorus/nn/functions.hpp"
#include "chorus/nn/init.hpp"

namespace chorus::scorers {

std::string RelevanceConfig::to_json() const {
  nlohmann::ordered_json j;
  j["emb_dim"] = emb_dim;
  j["filters"] = filters;
  j["filter_width"] = filter_width;
  j["init_scale"] = init_scale;
  j["dropout"] = dropout;
  j["seed"] = seed;
  return j.dump();
}

RelevanceConfig RelevanceConfig::from_json(const std::string& json) {
  const auto j = nlohmann::json::parse(json);
  RelevanceConfig c;
  c.emb_dim = j.at("emb_dim").get<int>();
  c.filters = j.at("filters").get<int>();
  c.filter_width = j.at("filter_width").get<int>();
  c.init_scale = j.at("init_scale").get<double>();
  c.dropout = j.at("dropout").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

RelevanceScorer::RelevanceScorer(int vocab_size, const RelevanceConfig& config,
                                 std::uint64_t vocab_hash)
    : config_(config), vocab_hash_(vocab_hash) {
  if (config.filter_width % 2 != 1)
    throw std::invalid_argument("filter width must be odd for same padding");
  Rng rng(config.seed);
  nn::uniform_init(params_.embedding, vocab_size, config.emb_dim, rng,
                   config.init_scale);
  nn::glorot_init(params_.conv_ctx, config.filters,
                  config.filter_width * config.emb_dim, rng);
  params_.conv_ctx_bias = Vector::Zero(config.filters);
  nn::glorot_init(params_.conv_cont, config.filters,
                  config.filter_width * config.emb_dim, rng);
  params_.conv_cont_bias = Vector::Zero(config.filters);
  nn::glorot_init(params_.w_read, config.filters, rng);
}

void RelevanceScorer::side_forward(const TokenIds& tokens, const Matrix& conv,
                                   const Vector& bias, SideCache& cache,
                                   Rng* dropout_rng) const {
  if (tokens.empty())
    throw std::invalid_argument("relevance scorer on an empty sequence");
  const int L = static_cast<int>(tokens.size());
  const int d = config_.emb_dim;
  const int w = config_.filter_width;
  const int half = w / 2;

  cache.tokens = tokens;
  cache.emb.resize(d, L);
  for (int i = 0; i < L; ++i)
    cache.emb.col(i) =
        params_.embedding.row(tokens[static_cast<std::size_t>(i)]).transpose();
  if (dropout_rng && config_.dropout > 0.0) {
    const double keep = 1.0 - config_.dropout;
    cache.emb_mask.resize(d, L);
    for (Eigen::Index j = 0; j < cache.emb_mask.cols(); ++j)
      for (Eigen::Index i = 0; i < cache.emb_mask.rows(); ++i)
        cache.emb_mask(i, j) =
            dropout_rng->uniform() < config_.dropout ? 0.0 : 1.0 / keep;
    cache.emb = cache.emb.cwiseProduct(cache.emb_mask);
  }

  // Same-padded convolution as shifted filter-slab products:
  // conv_out.col(i) = sum_o W_o * emb.col(i + o - half) + bias.
  cache.conv_out = bias.replicate(1, L);
  for (int o = 0; o < w; ++o) {
    const auto slab = conv.middleCols(o * d, d);  // filters x emb_dim
    const int shift = o - half;
    const int dst_begin = std::max(0, -shift);
    const int src_begin = std::max(0, shift);
    const int count = L - std::max(0, std::abs(shift));
    if (count <= 0) continue;
    cache.conv_out.middleCols(dst_begin, count).noalias() +=
        slab * cache.emb.middleCols(src_begin, count);
  }

  cache.argmax.assign(static_cast<std::size_t>(config_.filters), 0);
  Vector pooled(config_.filters);
  for (int f = 0; f < config_.filters; ++f) {
    int best = 0;
    for (int i = 1; i < L; ++i)
      if (cache.conv_out(f, i) > cache.conv_out(f, best)) best = i;
    cache.argmax[static_cast<std::size_t>(f)] = best;
    pooled[f] = cache.conv_out(f, best);
  }

  cache.pool_mask = Vector::Ones(config_.filters);
  if (dropout_rng && config_.dropout > 0.0) {
    const double keep = 1.0 - config_.dropout;
    for (Eigen::Index i = 0; i < cache.pool_mask.size(); ++i)
      cache.pool_mask[i] =
          dropout_rng->uniform() < config_.dropout ? 0.0 : 1.0 / keep;
  }
  cache.pooled = pooled.cwiseProduct(cache.pool_mask);
}

void RelevanceScorer::side_backward(const SideCache& cache, const Matrix& conv,
                                    const Vector& dpooled, Matrix& dconv,
                                    Vector& dbias, Matrix& dembedding) const {
  const int L = static_cast<int>(cache.tokens.size());
  const int d = config_.emb_dim;
  const int w = config_.filter_width;
  const int half = w / 2;

  const Vector dpool_raw = dpooled.cwiseProduct(cache.pool_mask);
  Matrix demb = Matrix::Zero(d, L);
  for (int f = 0; f < config_.filters; ++f) {
    const double g = dpool_raw[f];
    if (g == 0.0) continue;
    const int i = cache.argmax[static_cast<std::size_t>(f)];
    dbias[f] += g;
    for (int o = 0; o < w; ++o) {
      const int src = i + o - half;
      if (src < 0 || src >= L) continue;
      dconv.row(f).segment(o * d, d) += g * cache.emb.col(src).transpose();
      demb.col(src) += g * conv.row(f).segment(o * d, d).transpose();
    }
  }
  if (cache.emb_mask.size() > 0) demb = demb.cwiseProduct(cache.emb_mask);
  for (int i = 0; i < L; ++i)
    dembedding.row(cache.tokens[static_cast<std::size_t>(i)]) +=
        demb.col(i).transpose();
}

double RelevanceScorer::train_score(const TokenIds& context, const TokenIds& y,
                                    Cache& cache, Rng* dropout_rng) const {
  side_forward(context, params_.conv_ctx, params_.conv_ctx_bias, cache.ctx,
               dropout_rng);
  side_forward(y, params_.conv_cont, params_.conv_cont_bias, cache.cont,
               dropout_rng);
  return params_.w_read.dot(cache.ctx.pooled.cwiseProduct(cache.cont.pooled));
}

void RelevanceScorer::backward(const Cache& cache, double dscore,
                               Params& grads) const {
  const Vector prod = cache.ctx.pooled.cwiseProduct(cache.cont.pooled);
  grads.w_read += dscore * prod;
  const Vector dctx =
      dscore * params_.w_read.cwiseProduct(cache.cont.pooled);
  const Vector dcont =
      dscore * params_.w_read.cwiseProduct(cache.ctx.pooled);
  side_backward(cache.ctx, params_.conv_ctx, dctx, grads.conv_ctx,
                grads.conv_ctx_bias, grads.embedding);
  side_backward(cache.cont, params_.conv_cont, dcont, grads.conv_cont,
                grads.conv_cont_bias, grads.embedding);
}

ScorerOutput RelevanceScorer::score(const TokenIds& context,
                                    const TokenIds& prefix) const {
  Cache cache;
  const double raw = train_score(context, prefix, cache, nullptr);
  return {raw, nn::log_sigmoid(raw)};
}

Vector RelevanceScorer::pooled_context(const TokenIds& context) const {
  SideCache c;
  side_forward(context, params_.conv_ctx, params_.conv_ctx_bias, c, nullptr);
  return c.pooled;
}

Vector RelevanceScorer::pooled_continuation(const TokenIds& prefix) const {
  SideCache c;
  side_forward(prefix, params_.conv_cont, params_.conv_cont_bias, c, nullptr);
  return c.pooled;
}

std::unique_ptr<PrefixScorer::ContextCache> RelevanceScorer::prepare_context(
    const TokenIds& context) const {
  auto cache = std::make_unique<PooledContext>();
  cache->pooled = pooled_context(context);
  return cache;
}

ScorerOutput RelevanceScorer::score_prepared(const ContextCache* cache,
                                             const TokenIds& context,
                                             const TokenIds& prefix) const {
  const auto* prepared = dynamic_cast<const PooledContext*>(cache);
  if (!prepared) return score(context, prefix);
  SideCache cont;
  side_forward(prefix, params_.conv_cont, params_.conv_cont_bias, cont,
               nullptr);
  const double raw =
      params_.w_read.dot(prepared->pooled.cwiseProduct(cont.pooled));
  return {raw, nn::log_sigmoid(raw)};
}

void RelevanceScorer::save(const std::string& path, std::uint64_t config_hash,
                           std::uint64_t seed) const {
  nlohmann::ordered_json extra;
  extra["config"] = nlohmann::json::parse(config_.to_json());
  extra["vocab_size"] = static_cast<int>(params_.embedding.rows());
  extra["trained"] = trained_;
  io::CheckpointInfo info;
  info.kind = "relevance";
  info.config_json = extra.dump();
  info.config_hash = config_hash;
  info.seed = seed;
  info.vocab_hash = vocab_hash_;
  io::save_checkpoint(path, info, params_);
}

RelevanceScorer RelevanceScorer::load(const std::string& path) {
  const auto info = io::peek_checkpoint(path);
  const auto extra = nlohmann::json::parse(info.config_json);
  RelevanceScorer s(extra.at("vocab_size").get<int>(),
                    RelevanceConfig::from_json(extra.at("config").dump()),
                    info.vocab_hash);
  s.trained_ = extra.at("trained").get<bool>();
  io::load_checkpoint(path, "relevance", s.params_);
  return s;
}

}  // namespace chorus::scorers
