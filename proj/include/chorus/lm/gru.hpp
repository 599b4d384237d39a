// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_LM_GRU_HPP
#define CHORUS_LM_GRU_HPP

#include "chorus/rng.hpp"
#include "chorus/types.hpp"

namespace chorus::lm {

// Gated recurrent cell with update/reset gates:
//   r = sigma(Wr x + Ur h + br)
//   z = sigma(Wz x + Uz h + bz)
//   c = tanh(Wc x + Uc (r .* h) + bc)
//   h' = z .* h + (1 - z) .* c
// All biases initialized to zero. Columns are batch entries.
struct GruLayer {
  Matrix w_reset, u_reset;
  Matrix w_update, u_update;
  Matrix w_cand, u_cand;
  Vector b_reset, b_update, b_cand;

  void init(int in_dim, int hidden_dim, Rng& rng, double scale);

  int hidden_dim() const { return static_cast<int>(u_reset.rows()); }
  int in_dim() const { return static_cast<int>(w_reset.cols()); }

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
    f("w_reset", s.w_reset);
    f("u_reset", s.u_reset);
    f("w_update", s.w_update);
    f("u_update", s.u_update);
    f("w_cand", s.w_cand);
    f("u_cand", s.u_cand);
    f("b_reset", s.b_reset);
    f("b_update", s.b_update);
    f("b_cand", s.b_cand);
  }
};

struct GruStepCache {
  Matrix h_prev, r, z, c;
};

// Returns h'. When cache is non-null the intermediates needed by
// gru_backward are stored.
Matrix gru_forward(const GruLayer& layer, const Matrix& x,
                   const Matrix& h_prev, GruStepCache* cache = nullptr);

// Accumulates parameter gradients into `grads` and writes input/state
// gradients for one step.
void gru_backward(const GruLayer& layer, const Matrix& x,
                  const GruStepCache& cache, const Matrix& dh_out,
                  GruLayer& grads, Matrix& dx, Matrix& dh_prev);

}  // namespace chorus::lm

#endif  // CHORUS_LM_GRU_HPP
