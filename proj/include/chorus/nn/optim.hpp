// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_NN_OPTIM_HPP
#define CHORUS_NN_OPTIM_HPP

#include <cmath>

#include "chorus/nn/params.hpp"

namespace chorus::nn {

template <class P>
class Sgd {
 public:
  explicit Sgd(double lr) : lr_(lr) {}

  void step(P& params, const P& grads) { axpy(params, grads, -lr_); }

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
};

template <class P>
class Adam {
 public:
  Adam(const P& shape, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : m_(zeros_like(shape)),
        v_(zeros_like(shape)),
        lr_(lr),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {}

  void step(P& params, const P& grads) {
    ++t_;
    auto pm = flat_views(params);
    auto gm = flat_views(static_cast<const P&>(grads));
    auto mm = flat_views(m_);
    auto vm = flat_views(v_);
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < pm.size(); ++i) {
      auto p = Eigen::Map<Array>(pm[i].data, pm[i].size);
      auto g = Eigen::Map<const Array>(gm[i].data, gm[i].size);
      auto m = Eigen::Map<Array>(mm[i].data, mm[i].size);
      auto v = Eigen::Map<Array>(vm[i].data, vm[i].size);
      m = beta1_ * m + (1.0 - beta1_) * g;
      v = beta2_ * v + (1.0 - beta2_) * g.square();
      p -= lr_ * (m / bc1) / ((v / bc2).sqrt() + eps_);
    }
  }

 private:
  P m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

template <class P>
class Adagrad {
 public:
  // initial_accum keeps the first steps bounded (lr * g / sqrt(0.1)).
  Adagrad(const P& shape, double lr, double eps = 1e-10,
          double initial_accum = 0.1)
      : accum_(zeros_like(shape)), lr_(lr), eps_(eps) {
    for (auto& v : flat_views(accum_))
      Eigen::Map<Vector>(v.data, v.size).setConstant(initial_accum);
  }

  void step(P& params, const P& grads) {
    auto pm = flat_views(params);
    auto gm = flat_views(static_cast<const P&>(grads));
    auto am = flat_views(accum_);
    for (std::size_t i = 0; i < pm.size(); ++i) {
      auto p = Eigen::Map<Array>(pm[i].data, pm[i].size);
      auto g = Eigen::Map<const Array>(gm[i].data, gm[i].size);
      auto a = Eigen::Map<Array>(am[i].data, am[i].size);
      a += g.square();
      p -= lr_ * g / (a.sqrt() + eps_);
    }
  }

 private:
  P accum_;
  double lr_, eps_;
};

}  // namespace chorus::nn

#endif  // CHORUS_NN_OPTIM_HPP
