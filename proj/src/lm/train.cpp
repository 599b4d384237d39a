// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/lm/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "chorus/nn/functions.hpp"
#include "chorus/nn/optim.hpp"

namespace chorus::lm {

void LmTrainConfig::validate() const {
  if (learning_rate < 0.0) throw std::invalid_argument("negative learning rate");
  if (anneal_factor <= 0.0 || anneal_factor > 1.0)
    throw std::invalid_argument("anneal factor must be in (0, 1]");
  if (grad_clip <= 0.0) throw std::invalid_argument("grad clip must be > 0");
  if (batch_size < 1 || bptt_len < 1 || epochs < 1 || check_interval < 1)
    throw std::invalid_argument("batch/bptt/epochs/check_interval must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("dropout must be in [0, 1)");
}

namespace {

struct StepCache {
  Matrix x;        // emb_dim x B
  GruStepCache g1, g2;
  Matrix h1_out, h1_dropped, h2_out;
  Matrix mask;     // dropout mask (already scaled), empty when disabled
  Matrix z;        // emb_dim x B
  Matrix word_logits;     // V x B
  Matrix cluster_logits;  // k x B
};

}  // namespace

double lm_loss_and_grad(const LanguageModel& model,
                        const std::vector<TokenIds>& inputs,
                        const std::vector<TokenIds>& targets, Matrix& h1,
                        Matrix& h2, LmParams& grads, double dropout_rate,
                        Rng* dropout_rng) {
  const LmParams& p = model.params();
  const ClusterPartition& part = model.partition();
  const int steps = static_cast<int>(inputs.size());
  const int batch = static_cast<int>(inputs[0].size());
  const int emb = model.config().emb_dim;
  const bool use_dropout = dropout_rng != nullptr && dropout_rate > 0.0;

  std::vector<StepCache> caches(static_cast<std::size_t>(steps));
  double loss = 0.0;

  // Forward.
  for (int t = 0; t < steps; ++t) {
    auto& c = caches[static_cast<std::size_t>(t)];
    c.x.resize(emb, batch);
    for (int b = 0; b < batch; ++b)
      c.x.col(b) =
          p.embedding.row(inputs[static_cast<std::size_t>(t)]
                                [static_cast<std::size_t>(b)])
              .transpose();
    c.h1_out = gru_forward(p.gru1, c.x, h1, &c.g1);
    if (use_dropout) {
      c.mask.resize(c.h1_out.rows(), c.h1_out.cols());
      const double keep = 1.0 - dropout_rate;
      for (Eigen::Index j = 0; j < c.mask.cols(); ++j)
        for (Eigen::Index i = 0; i < c.mask.rows(); ++i)
          c.mask(i, j) = dropout_rng->uniform() < dropout_rate ? 0.0 : 1.0 / keep;
      c.h1_dropped = c.h1_out.cwiseProduct(c.mask);
    } else {
      c.h1_dropped = c.h1_out;
    }
    c.h2_out = gru_forward(p.gru2, c.h1_dropped, h2, &c.g2);
    c.z.noalias() = p.out_proj * c.h2_out;
    c.word_logits.noalias() = p.embedding * c.z;
    c.word_logits.colwise() += p.out_bias;
    c.cluster_logits.noalias() = p.cluster_proj * c.z;
    c.cluster_logits.colwise() += p.cluster_bias;

    for (int b = 0; b < batch; ++b) {
      const TokenId w =
          targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)];
      const int cl = part.cluster_of[static_cast<std::size_t>(w)];
      const auto& ids = part.members[static_cast<std::size_t>(cl)];
      Vector in_cluster(static_cast<Eigen::Index>(ids.size()));
      for (std::size_t i = 0; i < ids.size(); ++i)
        in_cluster[static_cast<Eigen::Index>(i)] = c.word_logits(ids[i], b);
      loss -= nn::log_softmax(c.cluster_logits.col(b))[cl];
      Eigen::Index idx = 0;
      for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == w) idx = static_cast<Eigen::Index>(i);
      loss -= nn::log_softmax(in_cluster)[idx];
    }
    h1 = c.h1_out;
    h2 = c.h2_out;
  }

  const double denom = static_cast<double>(steps * batch);

  // Backward.
  Matrix dh1_carry = Matrix::Zero(h1.rows(), h1.cols());
  Matrix dh2_carry = Matrix::Zero(h2.rows(), h2.cols());
  for (int t = steps - 1; t >= 0; --t) {
    auto& c = caches[static_cast<std::size_t>(t)];
    Matrix dword = Matrix::Zero(c.word_logits.rows(), batch);
    Matrix dcluster(c.cluster_logits.rows(), batch);
    for (int b = 0; b < batch; ++b) {
      const TokenId w =
          targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)];
      const int cl = part.cluster_of[static_cast<std::size_t>(w)];
      dcluster.col(b) = nn::softmax(c.cluster_logits.col(b));
      dcluster(cl, b) -= 1.0;
      const auto& ids = part.members[static_cast<std::size_t>(cl)];
      Vector in_cluster(static_cast<Eigen::Index>(ids.size()));
      for (std::size_t i = 0; i < ids.size(); ++i)
        in_cluster[static_cast<Eigen::Index>(i)] = c.word_logits(ids[i], b);
      const Vector pw = nn::softmax(in_cluster);
      for (std::size_t i = 0; i < ids.size(); ++i)
        dword(ids[i], b) =
            pw[static_cast<Eigen::Index>(i)] - (ids[i] == w ? 1.0 : 0.0);
    }
    dword /= denom;
    dcluster /= denom;

    grads.out_bias += dword.rowwise().sum();
    grads.cluster_bias += dcluster.rowwise().sum();
    grads.embedding.noalias() += dword * c.z.transpose();
    grads.cluster_proj.noalias() += dcluster * c.z.transpose();
    Matrix dz = p.embedding.transpose() * dword;
    dz.noalias() += p.cluster_proj.transpose() * dcluster;
    grads.out_proj.noalias() += dz * c.h2_out.transpose();

    Matrix dh2 = p.out_proj.transpose() * dz + dh2_carry;
    Matrix dh1_dropped;
    gru_backward(p.gru2, c.h1_dropped, c.g2, dh2, grads.gru2, dh1_dropped,
                 dh2_carry);
    Matrix dh1 = use_dropout ? dh1_dropped.cwiseProduct(c.mask).eval()
                             : dh1_dropped;
    dh1 += dh1_carry;
    Matrix dx;
    gru_backward(p.gru1, c.x, c.g1, dh1, grads.gru1, dx, dh1_carry);
    for (int b = 0; b < batch; ++b)
      grads.embedding
          .row(inputs[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)])
          += dx.col(b).transpose();
  }

  return loss / denom;
}

namespace {

double stream_perplexity(const LanguageModel& model, const TokenIds& stream) {
  return model.perplexity(stream);
}

}  // namespace

LanguageModel train_lm(const TokenIds& train_stream,
                       const TokenIds& valid_stream,
                       const std::vector<std::int64_t>& freq_by_id,
                       int vocab_size, const LmConfig& model_config,
                       const LmTrainConfig& train_config,
                       std::uint64_t vocab_hash, LmTrainReport* report,
                       const Matrix* initial_embedding) {
  train_config.validate();
  if (static_cast<int>(train_stream.size()) < train_config.bptt_len)
    throw std::invalid_argument(
        "training stream shorter than the truncation length");
  if (valid_stream.empty())
    throw std::invalid_argument("validation stream is empty");

  LanguageModel model(vocab_size, freq_by_id, model_config, vocab_hash);
  if (initial_embedding) {
    if (initial_embedding->rows() != model.params().embedding.rows() ||
        initial_embedding->cols() != model.params().embedding.cols())
      throw std::invalid_argument("initial embedding shape mismatch");
    model.params().embedding = *initial_embedding;
  }
  Rng dropout_rng(derive_seed(train_config.seed, 0xd120));

  // Arrange the stream as batch_size parallel columns; the begin symbol only
  // opens each column.
  const int batch = train_config.batch_size;
  const int col_len = static_cast<int>(train_stream.size()) / batch;
  if (col_len < 2)
    throw std::invalid_argument("training stream too small for batch size");
  auto token_at = [&](int col, int pos) -> TokenId {
    if (pos < 0) return LanguageModel::kBos;
    return train_stream[static_cast<std::size_t>(col * col_len + pos)];
  };

  nn::Sgd<LmParams> opt(train_config.learning_rate);
  LmParams grads = nn::zeros_like(model.params());

  double best_ppl = std::numeric_limits<double>::infinity();
  double running_loss = 0.0;
  int running_count = 0;
  int batches_done = 0;

  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    Matrix h1 = Matrix::Zero(model_config.hidden_dim, batch);
    Matrix h2 = Matrix::Zero(model_config.hidden_dim, batch);
    for (int start = 0; start + 1 < col_len; start += train_config.bptt_len) {
      const int steps = std::min(train_config.bptt_len, col_len - 1 - start);
      std::vector<TokenIds> inputs(static_cast<std::size_t>(steps));
      std::vector<TokenIds> targets(static_cast<std::size_t>(steps));
      for (int t = 0; t < steps; ++t) {
        auto& in = inputs[static_cast<std::size_t>(t)];
        auto& tg = targets[static_cast<std::size_t>(t)];
        in.resize(static_cast<std::size_t>(batch));
        tg.resize(static_cast<std::size_t>(batch));
        for (int b = 0; b < batch; ++b) {
          in[static_cast<std::size_t>(b)] = token_at(b, start + t - 1);
          tg[static_cast<std::size_t>(b)] = token_at(b, start + t);
        }
      }

      nn::set_zero(grads);
      const double loss =
          lm_loss_and_grad(model, inputs, targets, h1, h2, grads,
                           train_config.dropout, &dropout_rng);
      if (!std::isfinite(loss))
        throw std::runtime_error("language-model training diverged: loss=" +
                                 std::to_string(loss));
      nn::clip_global_norm(grads, train_config.grad_clip);
      opt.step(model.params(), grads);

      running_loss += loss;
      ++running_count;
      ++batches_done;
      if (batches_done % train_config.check_interval == 0) {
        const double ppl = stream_perplexity(model, valid_stream);
        if (!std::isfinite(ppl))
          throw std::runtime_error(
              "language-model training diverged: validation perplexity is "
              "not finite");
        if (ppl >= best_ppl) {
          opt.set_lr(opt.lr() * train_config.anneal_factor);
        } else {
          best_ppl = ppl;
        }
        if (report) {
          report->checks.push_back({batches_done,
                                    running_loss / running_count, ppl,
                                    opt.lr()});
        }
        running_loss = 0.0;
        running_count = 0;
      }
    }
  }

  const double final_ppl = stream_perplexity(model, valid_stream);
  if (!std::isfinite(final_ppl))
    throw std::runtime_error(
        "language-model training diverged: final perplexity is not finite");
  if (report) report->final_valid_perplexity = final_ppl;
  model.set_trained(true);
  return model;
}

}  // namespace chorus::lm
