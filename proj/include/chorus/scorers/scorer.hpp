// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_SCORERS_SCORER_HPP
#define CHORUS_SCORERS_SCORER_HPP

#include <memory>
#include <string>

#include "chorus/types.hpp"

namespace chorus::scorers {

enum class ScorerId { kRepetition, kEntailment, kRelevance, kStyle };

const char* to_string(ScorerId id);
ScorerId scorer_id_from_string(const std::string& s);

// A scorer emits a raw value plus the log-probability form that enters the
// decoding objective: log of an already-sigmoid score, log-sigmoid of an
// unbounded one, or a class log-probability. The log form is always <= 0.
struct ScorerOutput {
  double raw = 0.0;
  double log_prob = 0.0;
};

// Prefix-scoring contract shared by all discriminators: score(x, y) is
// defined for any continuation prefix y and equals the whole-sequence score
// when y is complete. Scores are recomputed from the full prefix on every
// call; implementations must be pure so beam hypotheses can score
// concurrently.
class PrefixScorer {
 public:
  virtual ~PrefixScorer() = default;

  virtual ScorerId id() const = 0;
  virtual ScorerOutput score(const TokenIds& context,
                             const TokenIds& prefix) const = 0;

  // True when the score only changes at sentence boundaries, letting the
  // decoder carry the previous value for mid-sentence prefixes.
  virtual bool boundary_only() const { return false; }

  // Optional precomputation over a fixed context; score_prepared must equal
  // score bitwise.
  struct ContextCache {
    virtual ~ContextCache() = default;
  };
  virtual std::unique_ptr<ContextCache> prepare_context(
      const TokenIds& context) const {
    (void)context;
    return nullptr;
  }
  virtual ScorerOutput score_prepared(const ContextCache* cache,
                                      const TokenIds& context,
                                      const TokenIds& prefix) const {
    (void)cache;
    return score(context, prefix);
  }
};

}  // namespace chorus::scorers

#endif  // CHORUS_SCORERS_SCORER_HPP
