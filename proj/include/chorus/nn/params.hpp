// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_NN_PARAMS_HPP
#define CHORUS_NN_PARAMS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "chorus/types.hpp"

namespace chorus::nn {

// Parameter structs expose their tensors through
//   template <class F> void visit_params(F&& f) [const]
// calling f(name, tensor) for every Matrix/Vector member, in a fixed order.
// Everything below (packing, optimizers, serialization, gradient checks)
// works through that hook.

struct FlatView {
  std::string name;
  double* data;
  Eigen::Index size;
};

struct ConstFlatView {
  std::string name;
  const double* data;
  Eigen::Index size;
};

template <class P>
std::vector<FlatView> flat_views(P& params) {
  std::vector<FlatView> views;
  params.visit_params([&](const char* name, auto& tensor) {
    views.push_back({name, tensor.data(), tensor.size()});
  });
  return views;
}

template <class P>
std::vector<ConstFlatView> flat_views(const P& params) {
  std::vector<ConstFlatView> views;
  params.visit_params([&](const char* name, const auto& tensor) {
    views.push_back({name, tensor.data(), tensor.size()});
  });
  return views;
}

template <class P>
Eigen::Index param_count(const P& params) {
  Eigen::Index n = 0;
  for (const auto& v : flat_views(params)) n += v.size;
  return n;
}

template <class P>
Vector pack_params(const P& params) {
  Vector out(param_count(params));
  Eigen::Index at = 0;
  for (const auto& v : flat_views(params)) {
    out.segment(at, v.size) = Eigen::Map<const Vector>(v.data, v.size);
    at += v.size;
  }
  return out;
}

template <class P>
void unpack_params(P& params, const Vector& flat) {
  Eigen::Index at = 0;
  for (auto& v : flat_views(params)) {
    Eigen::Map<Vector>(v.data, v.size) = flat.segment(at, v.size);
    at += v.size;
  }
}

template <class P>
void set_zero(P& params) {
  for (auto& v : flat_views(params))
    Eigen::Map<Vector>(v.data, v.size).setZero();
}

template <class P>
P zeros_like(const P& params) {
  P out = params;
  set_zero(out);
  return out;
}

// dst += a * src, tensor by tensor.
template <class P>
void axpy(P& dst, const P& src, double a) {
  auto d = flat_views(dst);
  auto s = flat_views(static_cast<const P&>(src));
  for (std::size_t i = 0; i < d.size(); ++i) {
    Eigen::Map<Vector>(d[i].data, d[i].size) +=
        a * Eigen::Map<const Vector>(s[i].data, s[i].size);
  }
}

template <class P>
void scale(P& params, double a) {
  for (auto& v : flat_views(params)) Eigen::Map<Vector>(v.data, v.size) *= a;
}

template <class P>
double squared_norm(const P& params) {
  double n = 0.0;
  for (const auto& v : flat_views(params))
    n += Eigen::Map<const Vector>(v.data, v.size).squaredNorm();
  return n;
}

template <class P>
double global_norm(const P& params) {
  return std::sqrt(squared_norm(params));
}

// Rescales so the global norm does not exceed max_norm.
template <class P>
void clip_global_norm(P& grads, double max_norm) {
  const double n = global_norm(grads);
  if (n > max_norm && n > 0.0) scale(grads, max_norm / n);
}

template <class P>
bool all_finite(const P& params) {
  for (const auto& v : flat_views(params)) {
    if (!Eigen::Map<const Vector>(v.data, v.size).allFinite()) return false;
  }
  return true;
}

}  // namespace chorus::nn

#endif  // CHORUS_NN_PARAMS_HPP
