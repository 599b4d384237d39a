// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/scorers/entailment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "chorus/io/checkpoint.hpp"
#include "chorus/nn/functions.hpp"
#include "chorus/nn/init.hpp"
#include "chorus/nn/optim.hpp"

namespace chorus::scorers {

std::string EntailmentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["emb_dim"] = emb_dim;
  j["proj_dim"] = proj_dim;
  j["hidden_dim"] = hidden_dim;
  j["init_scale"] = init_scale;
  j["dropout"] = dropout;
  j["seed"] = seed;
  return j.dump();
}

EntailmentConfig EntailmentConfig::from_json(const std::string& json) {
  const auto j = nlohmann::json::parse(json);
  EntailmentConfig c;
  c.emb_dim = j.at("emb_dim").get<int>();
  c.proj_dim = j.at("proj_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.init_scale = j.at("init_scale").get<double>();
  c.dropout = j.at("dropout").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

namespace {

// Two-layer feed-forward block with relu activations, applied column-wise.
struct Mlp2Cache {
  Matrix in, a1, h1, mask1, a2, out, mask2;
};

Matrix mlp2_forward(const Matrix& w1, const Vector& b1, const Matrix& w2,
                    const Vector& b2, const Matrix& in, Mlp2Cache& cache,
                    Rng* dropout_rng, double rate) {
  cache.in = in;
  cache.a1 = (w1 * in).colwise() + b1;
  cache.h1 = cache.a1.cwiseMax(0.0);
  if (dropout_rng && rate > 0.0) {
    const double keep = 1.0 - rate;
    cache.mask1.resize(cache.h1.rows(), cache.h1.cols());
    for (Eigen::Index j = 0; j < cache.mask1.cols(); ++j)
      for (Eigen::Index i = 0; i < cache.mask1.rows(); ++i)
        cache.mask1(i, j) = dropout_rng->uniform() < rate ? 0.0 : 1.0 / keep;
    cache.h1 = cache.h1.cwiseProduct(cache.mask1);
  }
  cache.a2 = (w2 * cache.h1).colwise() + b2;
  cache.out = cache.a2.cwiseMax(0.0);
  if (dropout_rng && rate > 0.0) {
    const double keep = 1.0 - rate;
    cache.mask2.resize(cache.out.rows(), cache.out.cols());
    for (Eigen::Index j = 0; j < cache.mask2.cols(); ++j)
      for (Eigen::Index i = 0; i < cache.mask2.rows(); ++i)
        cache.mask2(i, j) = dropout_rng->uniform() < rate ? 0.0 : 1.0 / keep;
    cache.out = cache.out.cwiseProduct(cache.mask2);
  }
  return cache.out;
}

Matrix mlp2_backward(const Matrix& w1, const Matrix& w2, const Mlp2Cache& cache,
                     const Matrix& dout, Matrix& dw1, Vector& db1, Matrix& dw2,
                     Vector& db2) {
  Matrix d2 = dout;
  if (cache.mask2.size() > 0) d2 = d2.cwiseProduct(cache.mask2);
  const Matrix da2 =
      d2.cwiseProduct((cache.a2.array() > 0.0).cast<double>().matrix());
  dw2.noalias() += da2 * cache.h1.transpose();
  db2 += da2.rowwise().sum();
  Matrix d1 = w2.transpose() * da2;
  if (cache.mask1.size() > 0) d1 = d1.cwiseProduct(cache.mask1);
  const Matrix da1 =
      d1.cwiseProduct((cache.a1.array() > 0.0).cast<double>().matrix());
  dw1.noalias() += da1 * cache.in.transpose();
  db1 += da1.rowwise().sum();
  return w1.transpose() * da1;
}

}  // namespace

struct EntailmentScorer::Cache {
  TokenIds a, b;
  Matrix emb_a, emb_b;    // emb_dim x len
  Matrix pa, pb;          // proj_dim x len
  Mlp2Cache f_a, f_b;
  Matrix eatt;            // la x lb
  Matrix p_ab, p_ba;      // attention weights
  Matrix beta, alpha;     // aligned representations
  Mlp2Cache g_a, g_b;
  Vector v1, v2;
  Mlp2Cache h_mlp;
  Vector logits, log_probs;
};

EntailmentScorer::EntailmentScorer(int vocab_size,
                                   const EntailmentConfig& config,
                                   std::uint64_t vocab_hash,
                                   std::vector<TokenId> terminator_ids)
    : config_(config),
      terminators_(std::move(terminator_ids)),
      vocab_hash_(vocab_hash) {
  Rng rng(config.seed);
  const int d = config.emb_dim, p = config.proj_dim, h = config.hidden_dim;
  nn::uniform_init(params_.embedding, vocab_size, d, rng, config.init_scale);
  nn::glorot_init(params_.proj, p, d, rng);
  nn::glorot_init(params_.f_w1, h, p, rng);
  params_.f_b1 = Vector::Zero(h);
  nn::glorot_init(params_.f_w2, h, h, rng);
  params_.f_b2 = Vector::Zero(h);
  nn::glorot_init(params_.g_w1, h, 2 * p, rng);
  params_.g_b1 = Vector::Zero(h);
  nn::glorot_init(params_.g_w2, h, h, rng);
  params_.g_b2 = Vector::Zero(h);
  nn::glorot_init(params_.h_w1, h, 2 * h, rng);
  params_.h_b1 = Vector::Zero(h);
  nn::glorot_init(params_.h_w2, h, h, rng);
  params_.h_b2 = Vector::Zero(h);
  nn::glorot_init(params_.out_w, 3, h, rng);
  params_.out_b = Vector::Zero(3);
}

namespace {

Matrix embed_columns(const Matrix& embedding, const TokenIds& tokens) {
  Matrix out(embedding.cols(), static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i)
    out.col(static_cast<Eigen::Index>(i)) =
        embedding.row(tokens[i]).transpose();
  return out;
}

}  // namespace

// Attend with F-transformed dot products, compare aligned pairs with G,
// aggregate by summation through H into a 3-way softmax.
static void nli_forward(const EntailmentScorer::Params& p,
                        const EntailmentConfig& cfg, const TokenIds& a,
                        const TokenIds& b, EntailmentScorer::Cache& c,
                        Rng* dropout_rng) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("NLI classification of an empty sentence");
  c.a = a;
  c.b = b;
  c.emb_a = embed_columns(p.embedding, a);
  c.emb_b = embed_columns(p.embedding, b);
  c.pa.noalias() = p.proj * c.emb_a;
  c.pb.noalias() = p.proj * c.emb_b;

  const Matrix fa = mlp2_forward(p.f_w1, p.f_b1, p.f_w2, p.f_b2, c.pa, c.f_a,
                                 dropout_rng, cfg.dropout);
  const Matrix fb = mlp2_forward(p.f_w1, p.f_b1, p.f_w2, p.f_b2, c.pb, c.f_b,
                                 dropout_rng, cfg.dropout);
  c.eatt.noalias() = fa.transpose() * fb;

  const Eigen::Index la = c.eatt.rows(), lb = c.eatt.cols();
  c.p_ab.resize(la, lb);
  for (Eigen::Index i = 0; i < la; ++i)
    c.p_ab.row(i) = nn::softmax(c.eatt.row(i).transpose()).transpose();
  c.p_ba.resize(la, lb);
  for (Eigen::Index j = 0; j < lb; ++j)
    c.p_ba.col(j) = nn::softmax(c.eatt.col(j));

  c.beta.noalias() = c.pb * c.p_ab.transpose();   // aligned b for each a_i
  c.alpha.noalias() = c.pa * c.p_ba;              // aligned a for each b_j

  Matrix ga_in(2 * cfg.proj_dim, la);
  ga_in.topRows(cfg.proj_dim) = c.pa;
  ga_in.bottomRows(cfg.proj_dim) = c.beta;
  Matrix gb_in(2 * cfg.proj_dim, lb);
  gb_in.topRows(cfg.proj_dim) = c.pb;
  gb_in.bottomRows(cfg.proj_dim) = c.alpha;
  const Matrix v1 = mlp2_forward(p.g_w1, p.g_b1, p.g_w2, p.g_b2, ga_in, c.g_a,
                                 dropout_rng, cfg.dropout);
  const Matrix v2 = mlp2_forward(p.g_w1, p.g_b1, p.g_w2, p.g_b2, gb_in, c.g_b,
                                 dropout_rng, cfg.dropout);
  c.v1 = v1.rowwise().sum();
  c.v2 = v2.rowwise().sum();

  Matrix h_in(2 * cfg.hidden_dim, 1);
  h_in.topRows(cfg.hidden_dim) = c.v1;
  h_in.bottomRows(cfg.hidden_dim) = c.v2;
  const Matrix hv = mlp2_forward(p.h_w1, p.h_b1, p.h_w2, p.h_b2, h_in, c.h_mlp,
                                 dropout_rng, cfg.dropout);
  c.logits = p.out_w * hv.col(0) + p.out_b;
  c.log_probs = nn::log_softmax(c.logits);
}

static void nli_backward(const EntailmentScorer::Params& p,
                         const EntailmentConfig& cfg,
                         EntailmentScorer::Cache& c, const Vector& dlogits,
                         EntailmentScorer::Params& g) {
  g.out_w.noalias() += dlogits * c.h_mlp.out.col(0).transpose();
  g.out_b += dlogits;
  const Matrix dhv = p.out_w.transpose() * dlogits;
  const Matrix dh_in = mlp2_backward(p.h_w1, p.h_w2, c.h_mlp, dhv, g.h_w1,
                                     g.h_b1, g.h_w2, g.h_b2);
  const Vector dv1 = dh_in.col(0).head(cfg.hidden_dim);
  const Vector dv2 = dh_in.col(0).tail(cfg.hidden_dim);

  const Eigen::Index la = c.eatt.rows(), lb = c.eatt.cols();
  const Matrix dV1 = dv1.replicate(1, la);
  const Matrix dV2 = dv2.replicate(1, lb);
  const Matrix dga_in = mlp2_backward(p.g_w1, p.g_w2, c.g_a, dV1, g.g_w1,
                                      g.g_b1, g.g_w2, g.g_b2);
  const Matrix dgb_in = mlp2_backward(p.g_w1, p.g_w2, c.g_b, dV2, g.g_w1,
                                      g.g_b1, g.g_w2, g.g_b2);
  Matrix dpa = dga_in.topRows(cfg.proj_dim);
  const Matrix dbeta = dga_in.bottomRows(cfg.proj_dim);
  Matrix dpb = dgb_in.topRows(cfg.proj_dim);
  const Matrix dalpha = dgb_in.bottomRows(cfg.proj_dim);

  // beta = pb * p_ab^T, alpha = pa * p_ba
  dpb.noalias() += dbeta * c.p_ab;
  Matrix dp_ab = dbeta.transpose() * c.pb;     // la x lb
  dpa.noalias() += dalpha * c.p_ba.transpose();
  Matrix dp_ba = c.pa.transpose() * dalpha;    // la x lb

  Matrix deatt(la, lb);
  for (Eigen::Index i = 0; i < la; ++i) {
    const auto prow = c.p_ab.row(i);
    const double dot = dp_ab.row(i).dot(prow);
    deatt.row(i) = (dp_ab.row(i).array() - dot) * prow.array();
  }
  for (Eigen::Index j = 0; j < lb; ++j) {
    const auto pcol = c.p_ba.col(j);
    const double dot = dp_ba.col(j).dot(pcol);
    deatt.col(j) += ((dp_ba.col(j).array() - dot) * pcol.array()).matrix();
  }

  // eatt = fa^T fb
  const Matrix dfa = c.f_b.out * deatt.transpose();
  const Matrix dfb = c.f_a.out * deatt;
  dpa += mlp2_backward(p.f_w1, p.f_w2, c.f_a, dfa, g.f_w1, g.f_b1, g.f_w2,
                       g.f_b2);
  dpb += mlp2_backward(p.f_w1, p.f_w2, c.f_b, dfb, g.f_w1, g.f_b1, g.f_w2,
                       g.f_b2);

  g.proj.noalias() += dpa * c.emb_a.transpose() + dpb * c.emb_b.transpose();
  const Matrix demb_a = p.proj.transpose() * dpa;
  const Matrix demb_b = p.proj.transpose() * dpb;
  for (std::size_t i = 0; i < c.a.size(); ++i)
    g.embedding.row(c.a[i]) +=
        demb_a.col(static_cast<Eigen::Index>(i)).transpose();
  for (std::size_t i = 0; i < c.b.size(); ++i)
    g.embedding.row(c.b[i]) +=
        demb_b.col(static_cast<Eigen::Index>(i)).transpose();
}

Vector EntailmentScorer::nli_classify(const TokenIds& premise,
                                      const TokenIds& hypothesis) const {
  Cache c;
  nli_forward(params_, config_, premise, hypothesis, c, nullptr);
  return c.log_probs.array().exp();
}

double EntailmentScorer::neutral_logprob(const TokenIds& premise,
                                         const TokenIds& hypothesis) const {
  Cache c;
  nli_forward(params_, config_, premise, hypothesis, c, nullptr);
  return c.log_probs[static_cast<int>(corpus::NliLabel::kNeutral)];
}

bool EntailmentScorer::is_terminator(TokenId id) const {
  return std::find(terminators_.begin(), terminators_.end(), id) !=
         terminators_.end();
}

std::vector<TokenIds> EntailmentScorer::complete_sentences(
    const TokenIds& tokens) const {
  std::vector<TokenIds> out;
  TokenIds current;
  for (TokenId id : tokens) {
    current.push_back(id);
    if (is_terminator(id)) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  return out;  // trailing partial sentence is dropped
}

ScorerOutput EntailmentScorer::score(const TokenIds& context,
                                     const TokenIds& prefix) const {
  const auto cont_sentences = complete_sentences(prefix);
  if (cont_sentences.empty()) return {0.0, 0.0};  // nothing to judge yet
  const TokenIds& last = cont_sentences.back();

  std::vector<const TokenIds*> preceding;
  const auto ctx_sentences = complete_sentences(context);
  for (const auto& s : ctx_sentences) preceding.push_back(&s);
  for (std::size_t i = 0; i + 1 < cont_sentences.size(); ++i)
    preceding.push_back(&cont_sentences[i]);
  if (preceding.empty()) return {0.0, 0.0};

  double best = std::numeric_limits<double>::infinity();
  for (const TokenIds* a : preceding)
    best = std::min(best, neutral_logprob(*a, last));
  return {best, best};
}

double EntailmentScorer::loss_and_grad(
    const std::vector<corpus::NliTriple>& batch, Params& grads,
    Rng* dropout_rng) const {
  double loss = 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& triple : batch) {
    Cache c;
    nli_forward(params_, config_, triple.premise, triple.hypothesis, c,
                dropout_rng);
    const int label = static_cast<int>(triple.label);
    loss -= c.log_probs[label] * inv;
    Vector dlogits = c.log_probs.array().exp();
    dlogits[label] -= 1.0;
    dlogits *= inv;
    nli_backward(params_, config_, c, dlogits, grads);
  }
  return loss;
}

NliTrainReport train_nli(EntailmentScorer& scorer,
                         const std::vector<corpus::NliTriple>& triples,
                         const NliTrainConfig& config) {
  if (triples.empty()) throw std::invalid_argument("no NLI training triples");
  std::set<int> classes;
  for (const auto& t : triples) classes.insert(static_cast<int>(t.label));
  if (classes.size() < 2)
    throw std::invalid_argument(
        "NLI training needs more than one label class");

  nn::Adagrad<EntailmentScorer::Params> opt(scorer.params(),
                                            config.learning_rate);
  Rng shuffle_rng(derive_seed(config.seed, 0x111a));
  Rng dropout_rng(derive_seed(config.seed, 0xd0));
  NliTrainReport report;

  std::vector<int> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<int>(i);

  auto grads = nn::zeros_like(scorer.params());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(config.batch_size)) {
      std::vector<corpus::NliTriple> batch;
      for (std::size_t i = at;
           i < std::min(order.size(),
                        at + static_cast<std::size_t>(config.batch_size));
           ++i)
        batch.push_back(triples[static_cast<std::size_t>(order[i])]);
      nn::set_zero(grads);
      const double loss = scorer.loss_and_grad(
          batch, grads,
          scorer.config().dropout > 0.0 ? &dropout_rng : nullptr);
      if (!std::isfinite(loss))
        throw std::runtime_error("NLI training diverged");
      if (config.grad_clip > 0.0) nn::clip_global_norm(grads, config.grad_clip);
      opt.step(scorer.params(), grads);
      epoch_loss += loss;
      ++batches;
    }
    report.epoch_losses.push_back(epoch_loss / std::max(1, batches));
  }
  report.train_accuracy = nli_accuracy(scorer, triples);
  scorer.set_trained(true);
  return report;
}

double nli_accuracy(const EntailmentScorer& scorer,
                    const std::vector<corpus::NliTriple>& triples) {
  if (triples.empty()) return 0.0;
  int correct = 0;
  for (const auto& t : triples) {
    const Vector probs = scorer.nli_classify(t.premise, t.hypothesis);
    Eigen::Index argmax;
    probs.maxCoeff(&argmax);
    if (argmax == static_cast<Eigen::Index>(t.label)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(triples.size());
}

void EntailmentScorer::save(const std::string& path, std::uint64_t config_hash,
                            std::uint64_t seed) const {
  nlohmann::ordered_json extra;
  extra["config"] = nlohmann::json::parse(config_.to_json());
  extra["vocab_size"] = static_cast<int>(params_.embedding.rows());
  extra["trained"] = trained_;
  extra["terminators"] = terminators_;
  io::CheckpointInfo info;
  info.kind = "entailment";
  info.config_json = extra.dump();
  info.config_hash = config_hash;
  info.seed = seed;
  info.vocab_hash = vocab_hash_;
  io::save_checkpoint(path, info, params_);
}

EntailmentScorer EntailmentScorer::load(const std::string& path) {
  const auto info = io::peek_checkpoint(path);
  const auto extra = nlohmann::json::parse(info.config_json);
  EntailmentScorer s(extra.at("vocab_size").get<int>(),
                     EntailmentConfig::from_json(extra.at("config").dump()),
                     info.vocab_hash,
                     extra.at("terminators").get<std::vector<TokenId>>());
  s.trained_ = extra.at("trained").get<bool>();
  io::load_checkpoint(path, "entailment", s.params_);
  return s;
}

}  // namespace chorus::scorers
