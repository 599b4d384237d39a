// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_TESTS_GRADCHECK_HPP
#define CHORUS_TESTS_GRADCHECK_HPP

#include <cmath>
#include <functional>

#include "chorus/nn/params.hpp"

namespace chorus::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  Eigen::Index worst_index = -1;
  Eigen::Index checked = 0;
};

// Central finite differences against an analytic gradient. The relative
// error denominator is floored at a fraction of the gradient's overall scale
// so coordinates with vanishing gradients are judged against that scale
// instead of amplifying finite-difference roundoff.
inline GradCheckResult gradcheck(
    const std::function<double(const Vector&)>& loss_at,
    const Vector& params, const Vector& analytic_grad,
    double step = 1e-5) {
  GradCheckResult result;
  result.checked = params.size();
  const double scale =
      std::max(1e-3, analytic_grad.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(params[i]));
    Vector p = params;
    p[i] = params[i] + h;
    const double up = loss_at(p);
    p[i] = params[i] - h;
    const double down = loss_at(p);
    const double fd = (up - down) / (2.0 * h);
    const double denom =
        std::max({1e-3 * scale, std::abs(fd), std::abs(analytic_grad[i])});
    const double rel = std::abs(fd - analytic_grad[i]) / denom;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = i;
    }
  }
  return result;
}

// Adds a small offset to every parameter, pushing relu/max pre-activations
// away from their kinks so central differences stay two-sided.
inline void dekink(Vector& params, std::uint64_t seed) {
  Rng rng(seed);
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    params[i] += sign * rng.uniform(0.02, 0.1);
  }
}

}  // namespace chorus::testing

#endif  // CHORUS_TESTS_GRADCHECK_HPP
