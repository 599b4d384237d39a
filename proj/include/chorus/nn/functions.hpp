// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_NN_FUNCTIONS_HPP
#define CHORUS_NN_FUNCTIONS_HPP

#include <cmath>

#include "chorus/types.hpp"

namespace chorus::nn {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)), stable for large |x|.
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

template <class Derived>
double logsumexp(const Eigen::MatrixBase<Derived>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

template <class Derived>
Vector log_softmax(const Eigen::MatrixBase<Derived>& v) {
  return v.array() - logsumexp(v);
}

template <class Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& v) {
  Vector s = (v.array() - v.maxCoeff()).exp();
  return s / s.sum();
}

// Column-wise softmax of a matrix.
inline Matrix softmax_columns(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = softmax(m.col(j));
  return out;
}

inline Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

}  // namespace chorus::nn

#endif  // CHORUS_NN_FUNCTIONS_HPP
