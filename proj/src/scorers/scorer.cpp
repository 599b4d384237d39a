// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/scorers/scorer.hpp"

#include <stdexcept>

namespace chorus::scorers {

const char* to_string(ScorerId id) {
  switch (id) {
    case ScorerId::kRepetition:
      return "repetition";
    case ScorerId::kEntailment:
      return "entailment";
    case ScorerId::kRelevance:
      return "relevance";
    case ScorerId::kStyle:
      return "style";
  }
  return "unknown";
}

ScorerId scorer_id_from_string(const std::string& s) {
  if (s == "repetition") return ScorerId::kRepetition;
  if (s == "entailment") return ScorerId::kEntailment;
  if (s == "relevance") return ScorerId::kRelevance;
  if (s == "style") return ScorerId::kStyle;
  throw std::invalid_argument("unknown scorer id: " + s);
}

}  // namespace chorus::scorers
