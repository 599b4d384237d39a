// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/lm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "chorus/io/checkpoint.hpp"
#include "chorus/nn/functions.hpp"
#include "chorus/nn/init.hpp"

namespace chorus::lm {

std::string LmConfig::to_json() const {
  nlohmann::ordered_json j;
  j["emb_dim"] = emb_dim;
  j["hidden_dim"] = hidden_dim;
  j["num_clusters"] = num_clusters;
  j["init_scale"] = init_scale;
  j["seed"] = seed;
  return j.dump();
}

LmConfig LmConfig::from_json(const std::string& json) {
  const auto j = nlohmann::json::parse(json);
  LmConfig c;
  c.emb_dim = j.at("emb_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.num_clusters = j.at("num_clusters").get<int>();
  c.init_scale = j.at("init_scale").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

LanguageModel::LanguageModel(int vocab_size,
                             const std::vector<std::int64_t>& freq_by_id,
                             const LmConfig& config, std::uint64_t vocab_hash)
    : config_(config), vocab_hash_(vocab_hash) {
  if (vocab_size < config.num_clusters)
    throw std::invalid_argument("vocabulary smaller than cluster count");
  partition_ = config.num_clusters <= 1
                   ? ClusterPartition::single_cluster(vocab_size)
                   : ClusterPartition::frequency_bands(freq_by_id);

  Rng rng(config.seed);
  nn::uniform_init(params_.embedding, vocab_size, config.emb_dim, rng,
                   config.init_scale);
  params_.gru1.init(config.emb_dim, config.hidden_dim, rng, config.init_scale);
  params_.gru2.init(config.hidden_dim, config.hidden_dim, rng,
                    config.init_scale);
  nn::glorot_init(params_.out_proj, config.emb_dim, config.hidden_dim, rng);
  params_.out_bias = Vector::Zero(vocab_size);
  nn::glorot_init(params_.cluster_proj, partition_.num_clusters(),
                  config.emb_dim, rng);
  // Start the cluster prior at the band shares so an otherwise zeroed output
  // layer yields the uniform distribution over the vocabulary.
  params_.cluster_bias = Vector(partition_.num_clusters());
  for (int c = 0; c < partition_.num_clusters(); ++c) {
    params_.cluster_bias[c] = std::log(
        static_cast<double>(partition_.members[static_cast<std::size_t>(c)]
                                .size()) /
        static_cast<double>(vocab_size));
  }
}

void LanguageModel::check_token(TokenId id) const {
  if (id < 0 || id >= vocab_size())
    throw std::out_of_range("token id outside vocabulary: " +
                            std::to_string(id));
}

LmState LanguageModel::initial_state() const {
  LmState s;
  s.h1 = Vector::Zero(config_.hidden_dim);
  s.h2 = Vector::Zero(config_.hidden_dim);
  advance(s, kBos);
  return s;
}

void LanguageModel::advance(LmState& state, TokenId token) const {
  check_token(token);
  const Vector x = params_.embedding.row(token).transpose();
  state.h1 = gru_forward(params_.gru1, x, state.h1);
  state.h2 = gru_forward(params_.gru2, state.h1, state.h2);
}

LmState LanguageModel::context_state(const TokenIds& context) const {
  LmState s = initial_state();
  for (TokenId t : context) advance(s, t);
  return s;
}

Vector LanguageModel::next_log_probs(const LmState& state) const {
  const Vector z = params_.out_proj * state.h2;
  const Vector word_logits = params_.embedding * z + params_.out_bias;
  const Vector cluster_logits = params_.cluster_proj * z + params_.cluster_bias;
  return clustered_log_softmax(cluster_logits, word_logits, partition_);
}

Vector LanguageModel::next_token_logprobs(const TokenIds& prefix) const {
  LmState s = initial_state();
  for (TokenId t : prefix) advance(s, t);
  return next_log_probs(s);
}

double LanguageModel::sequence_logprob(const TokenIds& sequence) const {
  if (sequence.empty())
    throw std::invalid_argument("sequence_logprob on an empty sequence");
  LmState s = initial_state();
  double total = 0.0;
  for (TokenId t : sequence) {
    check_token(t);
    total += next_log_probs(s)[t];
    advance(s, t);
  }
  return total;
}

TokenIds LanguageModel::sample_continuation(const TokenIds& context,
                                            int max_tokens, double temperature,
                                            std::uint64_t seed) const {
  return sample_continuation(context, max_tokens, temperature, seed, {});
}

TokenIds LanguageModel::sample_continuation(
    const TokenIds& context, int max_tokens, double temperature,
    std::uint64_t seed, const std::vector<TokenId>& banned) const {
  if (temperature <= 0.0)
    throw std::invalid_argument("sampling temperature must be positive");
  Rng rng(seed);
  LmState s = context_state(context);
  TokenIds out;
  const bool term_banned =
      std::find(banned.begin(), banned.end(), kTerm) != banned.end();
  for (int i = 0; i < max_tokens; ++i) {
    Vector lp = next_log_probs(s);
    for (TokenId b : banned) lp[b] = -std::numeric_limits<double>::infinity();
    Vector scaled = lp / temperature;
    const double m = scaled.maxCoeff();
    Array probs = (scaled.array() - m).exp();
    probs /= probs.sum();
    const double u = rng.uniform();
    double acc = 0.0;
    TokenId chosen = 0;
    for (Eigen::Index t = 0; t < probs.size(); ++t) {
      acc += probs[t];
      if (u < acc) {
        chosen = static_cast<TokenId>(t);
        break;
      }
      if (t + 1 == probs.size()) chosen = static_cast<TokenId>(t);
    }
    if (chosen == kTerm && !term_banned) break;
    out.push_back(chosen);
    advance(s, chosen);
  }
  return out;
}

double LanguageModel::perplexity(const TokenIds& stream) const {
  if (stream.empty())
    throw std::invalid_argument("perplexity of an empty stream");
  return std::exp(-sequence_logprob(stream) /
                  static_cast<double>(stream.size()));
}

void LanguageModel::save(const std::string& path, std::uint64_t config_hash,
                         std::uint64_t seed) const {
  nlohmann::ordered_json extra;
  extra["config"] = nlohmann::json::parse(config_.to_json());
  extra["vocab_size"] = vocab_size();
  extra["trained"] = trained_;
  extra["cluster_of"] = partition_.cluster_of;

  io::CheckpointInfo info;
  info.kind = "lm";
  info.config_json = extra.dump();
  info.config_hash = config_hash;
  info.seed = seed;
  info.vocab_hash = vocab_hash_;
  io::save_checkpoint(path, info, params_);
}

LanguageModel LanguageModel::load(const std::string& path) {
  const auto info = io::peek_checkpoint(path);
  if (info.kind != "lm")
    throw std::runtime_error("not a language-model checkpoint: " + path);
  const auto extra = nlohmann::json::parse(info.config_json);

  LanguageModel model;
  model.config_ = LmConfig::from_json(extra.at("config").dump());
  model.vocab_hash_ = info.vocab_hash;
  model.trained_ = extra.at("trained").get<bool>();

  const int v = extra.at("vocab_size").get<int>();
  const auto cluster_of = extra.at("cluster_of").get<std::vector<int>>();
  ClusterPartition part;
  part.cluster_of = cluster_of;
  int k = 0;
  for (int c : cluster_of) k = std::max(k, c + 1);
  part.members.resize(static_cast<std::size_t>(k));
  for (int id = 0; id < v; ++id)
    part.members[static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(
                     id)])]
        .push_back(id);
  model.partition_ = std::move(part);

  // Shape params before reading tensors.
  model.params_.embedding.resize(v, model.config_.emb_dim);
  Rng dummy(0);
  model.params_.gru1.init(model.config_.emb_dim, model.config_.hidden_dim,
                          dummy, 0.0);
  model.params_.gru2.init(model.config_.hidden_dim, model.config_.hidden_dim,
                          dummy, 0.0);
  model.params_.out_proj.resize(model.config_.emb_dim,
                                model.config_.hidden_dim);
  model.params_.out_bias.resize(v);
  model.params_.cluster_proj.resize(k, model.config_.emb_dim);
  model.params_.cluster_bias.resize(k);

  io::load_checkpoint(path, "lm", model.params_);
  return model;
}

}  // namespace chorus::lm
