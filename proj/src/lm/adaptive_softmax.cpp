// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/lm/adaptive_softmax.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "chorus/nn/functions.hpp"

namespace chorus::lm {

ClusterPartition ClusterPartition::frequency_bands(
    const std::vector<std::int64_t>& freq_by_id,
    const std::vector<double>& fractions) {
  const int v = static_cast<int>(freq_by_id.size());
  const int k = static_cast<int>(fractions.size()) + 1;
  if (v < k) throw std::invalid_argument("vocabulary smaller than bands");

  std::vector<int> order(static_cast<std::size_t>(v));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto fa = freq_by_id[static_cast<std::size_t>(a)];
    const auto fb = freq_by_id[static_cast<std::size_t>(b)];
    if (fa != fb) return fa > fb;
    return a < b;
  });

  std::vector<int> sizes;
  int assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    int s = std::max<int>(
        1, static_cast<int>(fractions[i] * static_cast<double>(v)));
    s = std::min(s, v - assigned - (k - 1 - static_cast<int>(i)));
    sizes.push_back(s);
    assigned += s;
  }
  sizes.push_back(v - assigned);

  ClusterPartition part;
  part.cluster_of.assign(static_cast<std::size_t>(v), 0);
  part.members.resize(static_cast<std::size_t>(k));
  int at = 0;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < sizes[static_cast<std::size_t>(c)]; ++i, ++at) {
      const int id = order[static_cast<std::size_t>(at)];
      part.cluster_of[static_cast<std::size_t>(id)] = c;
      part.members[static_cast<std::size_t>(c)].push_back(id);
    }
  }
  for (auto& m : part.members) std::sort(m.begin(), m.end());
  return part;
}

ClusterPartition ClusterPartition::single_cluster(int vocab_size) {
  ClusterPartition part;
  part.cluster_of.assign(static_cast<std::size_t>(vocab_size), 0);
  part.members.resize(1);
  part.members[0].resize(static_cast<std::size_t>(vocab_size));
  std::iota(part.members[0].begin(), part.members[0].end(), 0);
  return part;
}

Vector clustered_log_softmax(const Vector& cluster_logits,
                             const Vector& word_logits,
                             const ClusterPartition& partition) {
  if (cluster_logits.size() != partition.num_clusters() ||
      word_logits.size() != partition.vocab_size()) {
    throw std::invalid_argument("clustered_log_softmax: size mismatch");
  }
  const Vector log_cluster = nn::log_softmax(cluster_logits);
  Vector out(word_logits.size());
  for (int c = 0; c < partition.num_clusters(); ++c) {
    const auto& ids = partition.members[static_cast<std::size_t>(c)];
    Vector in_cluster(static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i)
      in_cluster[static_cast<Eigen::Index>(i)] =
          word_logits[ids[i]];
    const Vector log_words = nn::log_softmax(in_cluster);
    for (std::size_t i = 0; i < ids.size(); ++i)
      out[ids[i]] = log_cluster[c] + log_words[static_cast<Eigen::Index>(i)];
  }
  return out;
}

}  // namespace chorus::lm
