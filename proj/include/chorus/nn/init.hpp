// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_NN_INIT_HPP
#define CHORUS_NN_INIT_HPP

#include <cmath>

#include "chorus/rng.hpp"
#include "chorus/types.hpp"

namespace chorus::nn {

inline void uniform_init(Matrix& m, int rows, int cols, Rng& rng,
                         double scale) {
  m.resize(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      m(i, j) = rng.uniform(-scale, scale);
}

inline void uniform_init(Vector& v, int size, Rng& rng, double scale) {
  v.resize(size);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = rng.uniform(-scale, scale);
}

// Glorot/fan-balanced uniform init; keeps activation scale roughly constant
// through stacked layers. fan_out for a (rows x cols) map is rows.
inline void glorot_init(Matrix& m, int rows, int cols, Rng& rng) {
  const double scale = std::sqrt(6.0 / static_cast<double>(rows + cols));
  uniform_init(m, rows, cols, rng, scale);
}

inline void glorot_init(Vector& v, int size, Rng& rng) {
  const double scale = std::sqrt(6.0 / static_cast<double>(size + 1));
  uniform_init(v, size, rng, scale);
}

}  // namespace chorus::nn

#endif  // CHORUS_NN_INIT_HPP
