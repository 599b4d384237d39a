// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/scorers/repetition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "chorus/io/checkpoint.hpp"
#include "chorus/nn/functions.hpp"
#include "chorus/nn/init.hpp"

namespace chorus::scorers {

std::string RepetitionConfig::to_json() const {
  nlohmann::ordered_json j;
  j["emb_dim"] = emb_dim;
  j["hidden_dim"] = hidden_dim;
  j["window"] = window;
  j["init_scale"] = init_scale;
  j["dropout"] = dropout;
  j["seed"] = seed;
  return j.dump();
}

RepetitionConfig RepetitionConfig::from_json(const std::string& json) {
  const auto j = nlohmann::json::parse(json);
  RepetitionConfig c;
  c.emb_dim = j.at("emb_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.window = j.at("window").get<int>();
  c.init_scale = j.at("init_scale").get<double>();
  c.dropout = j.at("dropout").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

RepetitionScorer::RepetitionScorer(int vocab_size,
                                   const RepetitionConfig& config,
                                   std::uint64_t vocab_hash)
    : config_(config), vocab_hash_(vocab_hash) {
  if (config.window < 1) throw std::invalid_argument("window must be >= 1");
  Rng rng(config.seed);
  nn::uniform_init(params_.embedding, vocab_size, config.emb_dim, rng,
                   config.init_scale);
  nn::glorot_init(params_.w_in, config.hidden_dim, 1, rng);
  nn::glorot_init(params_.u_rec, config.hidden_dim, config.hidden_dim, rng);
  params_.b = Vector::Zero(config.hidden_dim);
  nn::glorot_init(params_.w_read, config.hidden_dim, rng);
}

Vector RepetitionScorer::similarities(const TokenIds& y) const {
  if (y.empty())
    throw std::invalid_argument("repetition similarities of an empty prefix");
  const int n = static_cast<int>(y.size());
  Vector d(n);
  d[0] = -1.0;  // empty window sentinel
  for (int i = 1; i < n; ++i) {
    const int lo = std::max(0, i - config_.window);
    double best = -1.0;
    const auto ei = params_.embedding.row(y[static_cast<std::size_t>(i)]);
    const double ni = ei.norm();
    for (int j = lo; j < i; ++j) {
      double sim;
      if (y[static_cast<std::size_t>(j)] == y[static_cast<std::size_t>(i)]) {
        sim = 1.0;
      } else {
        const auto ej = params_.embedding.row(y[static_cast<std::size_t>(j)]);
        const double denom = ni * ej.norm();
        sim = denom > 0.0 ? std::clamp(ei.dot(ej) / denom, -1.0, 1.0) : 0.0;
      }
      best = std::max(best, sim);
    }
    d[i] = best;
  }
  return d;
}

double RepetitionScorer::train_score(const TokenIds& /*context*/,
                                     const TokenIds& y, Cache& cache,
                                     Rng* dropout_rng) const {
  cache.d = similarities(y);
  const int n = static_cast<int>(cache.d.size());
  cache.hidden.assign(static_cast<std::size_t>(n), Vector());
  Vector h = Vector::Zero(config_.hidden_dim);
  for (int t = 0; t < n; ++t) {
    h = (params_.w_in.col(0) * cache.d[t] + params_.u_rec * h + params_.b)
            .array()
            .tanh();
    cache.hidden[static_cast<std::size_t>(t)] = h;
  }
  cache.read_mask = Vector::Ones(config_.hidden_dim);
  if (dropout_rng && config_.dropout > 0.0) {
    const double keep = 1.0 - config_.dropout;
    for (Eigen::Index i = 0; i < cache.read_mask.size(); ++i)
      cache.read_mask[i] =
          dropout_rng->uniform() < config_.dropout ? 0.0 : 1.0 / keep;
  }
  const double pre = params_.w_read.dot(h.cwiseProduct(cache.read_mask));
  cache.sig = nn::sigmoid(pre);
  return cache.sig;
}

void RepetitionScorer::backward(const Cache& cache, double dscore,
                                Params& grads) const {
  const int n = static_cast<int>(cache.d.size());
  const double dpre = dscore * cache.sig * (1.0 - cache.sig);
  const Vector& h_last = cache.hidden[static_cast<std::size_t>(n - 1)];
  grads.w_read += dpre * h_last.cwiseProduct(cache.read_mask);
  Vector dh = dpre * params_.w_read.cwiseProduct(cache.read_mask);
  for (int t = n - 1; t >= 0; --t) {
    const Vector& h = cache.hidden[static_cast<std::size_t>(t)];
    const Vector da = dh.cwiseProduct((1.0 - h.array().square()).matrix());
    grads.w_in.col(0) += da * cache.d[t];
    grads.b += da;
    if (t > 0) {
      const Vector& h_prev = cache.hidden[static_cast<std::size_t>(t - 1)];
      grads.u_rec.noalias() += da * h_prev.transpose();
      dh = params_.u_rec.transpose() * da;
    }
    // Similarity inputs are functions of the frozen embeddings only.
  }
}

ScorerOutput RepetitionScorer::score(const TokenIds& context,
                                     const TokenIds& prefix) const {
  Cache cache;
  const double s = train_score(context, prefix, cache, nullptr);
  return {s, std::log(s)};
}

void RepetitionScorer::save(const std::string& path,
                            std::uint64_t config_hash,
                            std::uint64_t seed) const {
  nlohmann::ordered_json extra;
  extra["config"] = nlohmann::json::parse(config_.to_json());
  extra["vocab_size"] = static_cast<int>(params_.embedding.rows());
  extra["trained"] = trained_;
  io::CheckpointInfo info;
  info.kind = "repetition";
  info.config_json = extra.dump();
  info.config_hash = config_hash;
  info.seed = seed;
  info.vocab_hash = vocab_hash_;
  io::save_checkpoint(path, info, params_);
}

RepetitionScorer RepetitionScorer::load(const std::string& path) {
  const auto info = io::peek_checkpoint(path);
  const auto extra = nlohmann::json::parse(info.config_json);
  RepetitionScorer s(extra.at("vocab_size").get<int>(),
                     RepetitionConfig::from_json(extra.at("config").dump()),
                     info.vocab_hash);
  s.trained_ = extra.at("trained").get<bool>();
  io::load_checkpoint(path, "repetition", s.params_);
  return s;
}

}  // namespace chorus::scorers
