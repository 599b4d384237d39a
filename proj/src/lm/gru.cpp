// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/lm/gru.hpp"

#include "chorus/nn/init.hpp"

namespace chorus::lm {

void GruLayer::init(int in_dim, int hidden_dim, Rng& rng, double scale) {
  if (scale > 0.0) {
    nn::glorot_init(w_reset, hidden_dim, in_dim, rng);
    nn::glorot_init(u_reset, hidden_dim, hidden_dim, rng);
    nn::glorot_init(w_update, hidden_dim, in_dim, rng);
    nn::glorot_init(u_update, hidden_dim, hidden_dim, rng);
    nn::glorot_init(w_cand, hidden_dim, in_dim, rng);
    nn::glorot_init(u_cand, hidden_dim, hidden_dim, rng);
  } else {
    nn::uniform_init(w_reset, hidden_dim, in_dim, rng, 0.0);
    nn::uniform_init(u_reset, hidden_dim, hidden_dim, rng, 0.0);
    nn::uniform_init(w_update, hidden_dim, in_dim, rng, 0.0);
    nn::uniform_init(u_update, hidden_dim, hidden_dim, rng, 0.0);
    nn::uniform_init(w_cand, hidden_dim, in_dim, rng, 0.0);
    nn::uniform_init(u_cand, hidden_dim, hidden_dim, rng, 0.0);
  }
  b_reset = Vector::Zero(hidden_dim);
  b_update = Vector::Zero(hidden_dim);
  b_cand = Vector::Zero(hidden_dim);
}

Matrix gru_forward(const GruLayer& layer, const Matrix& x,
                   const Matrix& h_prev, GruStepCache* cache) {
  const auto sigmoid = [](const Matrix& m) {
    return (1.0 / (1.0 + (-m.array()).exp())).matrix();
  };
  Matrix r = (layer.w_reset * x + layer.u_reset * h_prev).colwise() +
             layer.b_reset;
  r = sigmoid(r);
  Matrix z = (layer.w_update * x + layer.u_update * h_prev).colwise() +
             layer.b_update;
  z = sigmoid(z);
  Matrix c = (layer.w_cand * x +
              layer.u_cand * r.cwiseProduct(h_prev))
                 .colwise() +
             layer.b_cand;
  c = c.array().tanh().matrix();
  Matrix h = z.cwiseProduct(h_prev) + (1.0 - z.array()).matrix().cwiseProduct(c);
  if (cache) {
    cache->h_prev = h_prev;
    cache->r = std::move(r);
    cache->z = std::move(z);
    cache->c = std::move(c);
  }
  return h;
}

void gru_backward(const GruLayer& layer, const Matrix& x,
                  const GruStepCache& cache, const Matrix& dh_out,
                  GruLayer& grads, Matrix& dx, Matrix& dh_prev) {
  const Matrix& h_prev = cache.h_prev;
  const Matrix& r = cache.r;
  const Matrix& z = cache.z;
  const Matrix& c = cache.c;

  const Matrix dz = dh_out.cwiseProduct(h_prev - c);
  const Matrix dc = dh_out.cwiseProduct((1.0 - z.array()).matrix());
  dh_prev = dh_out.cwiseProduct(z);

  const Matrix da_c =
      dc.cwiseProduct((1.0 - c.array().square()).matrix());
  const Matrix rh = r.cwiseProduct(h_prev);
  grads.w_cand.noalias() += da_c * x.transpose();
  grads.u_cand.noalias() += da_c * rh.transpose();
  grads.b_cand += da_c.rowwise().sum();
  const Matrix drh = layer.u_cand.transpose() * da_c;
  const Matrix dr = drh.cwiseProduct(h_prev);
  dh_prev += drh.cwiseProduct(r);

  const Matrix da_r =
      dr.cwiseProduct(r.cwiseProduct((1.0 - r.array()).matrix()));
  grads.w_reset.noalias() += da_r * x.transpose();
  grads.u_reset.noalias() += da_r * h_prev.transpose();
  grads.b_reset += da_r.rowwise().sum();
  dh_prev.noalias() += layer.u_reset.transpose() * da_r;

  const Matrix da_z =
      dz.cwiseProduct(z.cwiseProduct((1.0 - z.array()).matrix()));
  grads.w_update.noalias() += da_z * x.transpose();
  grads.u_update.noalias() += da_z * h_prev.transpose();
  grads.b_update += da_z.rowwise().sum();
  dh_prev.noalias() += layer.u_update.transpose() * da_z;

  dx = layer.w_reset.transpose() * da_r + layer.w_update.transpose() * da_z +
       layer.w_cand.transpose() * da_c;
}

}  // namespace chorus::lm
