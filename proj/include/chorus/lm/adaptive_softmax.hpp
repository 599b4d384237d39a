// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_LM_ADAPTIVE_SOFTMAX_HPP
#define CHORUS_LM_ADAPTIVE_SOFTMAX_HPP

#include <cstdint>
#include <vector>

#include "chorus/types.hpp"

namespace chorus::lm {

// Partition of the vocabulary into frequency bands for the clustered
// softmax. Every token belongs to exactly one cluster.
struct ClusterPartition {
  std::vector<int> cluster_of;            // token id -> cluster index
  std::vector<std::vector<int>> members;  // cluster index -> token ids

  int num_clusters() const { return static_cast<int>(members.size()); }
  int vocab_size() const { return static_cast<int>(cluster_of.size()); }

  // Bands by vocabulary share, most frequent first. With the default
  // fractions {0.2, 0.3} the bands are top 20%, next 30%, and the rest.
  // Each band is forced non-empty.
  static ClusterPartition frequency_bands(
      const std::vector<std::int64_t>& freq_by_id,
      const std::vector<double>& fractions = {0.2, 0.3});

  static ClusterPartition single_cluster(int vocab_size);
};

// Two-stage factorization: the probability of a token is the probability of
// its cluster times the in-cluster probability of the token. Returns the
// full log-probability vector over the vocabulary.
Vector clustered_log_softmax(const Vector& cluster_logits,
                             const Vector& word_logits,
                             const ClusterPartition& partition);

}  // namespace chorus::lm

#endif  // CHORUS_LM_ADAPTIVE_SOFTMAX_HPP
