// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_METRICS_METRICS_HPP
#define CHORUS_METRICS_METRICS_HPP

#include <string>
#include <vector>

#include "chorus/types.hpp"

namespace chorus::metrics {

struct DiversityMetrics {
  double avg_length = 0.0;
  double vocab_pct = 0.0;    // mean per-example % unique tokens
  double trigram_pct = 0.0;  // mean per-example % unique trigrams
};

// Per-example unique-token and unique-trigram percentages, averaged over
// examples. Sequences shorter than three tokens contribute 100 to the
// trigram percentage. Rejects empty generations.
DiversityMetrics diversity_metrics(const std::vector<TokenIds>& generations);

// Corpus-level BLEU in [0, 100]: geometric mean of modified n-gram
// precisions with brevity penalty. Precisions for n >= 2 are add-one
// smoothed; orders with no hypothesis n-grams are skipped.
double corpus_bleu(const std::vector<TokenIds>& hypotheses,
                   const std::vector<TokenIds>& references, int max_n = 4);

struct MetricsReport {
  std::string label;
  double bleu = 0.0;
  double avg_length = 0.0;
  double vocab_pct = 0.0;
  double trigram_pct = 0.0;
  int n_examples = 0;

  void validate() const;
};

struct EvaluationReport {
  MetricsReport system;
  MetricsReport reference;  // the reference row scored against itself
  std::string bleu_notes =
      "corpus BLEU, max n = 4, add-one smoothing on n >= 2, "
      "zero-count orders skipped";
  std::string meteor_notes = "Meteor unavailable (no external aligner)";
};

EvaluationReport evaluate_generations(const std::vector<TokenIds>& outputs,
                                      const std::vector<TokenIds>& references,
                                      const std::string& label);

// Fixed-width table with one row per report, mirroring the automatic-metric
// columns.
std::string format_report_table(const std::vector<MetricsReport>& rows);

}  // namespace chorus::metrics

#endif  // CHORUS_METRICS_METRICS_HPP
