// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/metrics/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace chorus::metrics {

namespace {

using Ngram = std::vector<TokenId>;

std::map<Ngram, int> ngram_counts(const TokenIds& seq, int n) {
  std::map<Ngram, int> counts;
  if (static_cast<int>(seq.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= seq.size(); ++i) {
    Ngram g(seq.begin() + static_cast<std::ptrdiff_t>(i),
            seq.begin() + static_cast<std::ptrdiff_t>(i + static_cast<std::size_t>(n)));
    ++counts[g];
  }
  return counts;
}

}  // namespace

DiversityMetrics diversity_metrics(const std::vector<TokenIds>& generations) {
  if (generations.empty())
    throw std::invalid_argument("no generations to evaluate");
  double total_len = 0.0, vocab_sum = 0.0, trigram_sum = 0.0;
  for (const auto& g : generations) {
    if (g.empty())
      throw std::invalid_argument("empty generation in metrics input");
    total_len += static_cast<double>(g.size());

    const auto unigrams = ngram_counts(g, 1);
    vocab_sum += 100.0 * static_cast<double>(unigrams.size()) /
                 static_cast<double>(g.size());

    if (g.size() < 3) {
      trigram_sum += 100.0;
    } else {
      const auto trigrams = ngram_counts(g, 3);
      const double total = static_cast<double>(g.size() - 2);
      trigram_sum += 100.0 * static_cast<double>(trigrams.size()) / total;
    }
  }
  const double n = static_cast<double>(generations.size());
  return {total_len / n, vocab_sum / n, trigram_sum / n};
}

double corpus_bleu(const std::vector<TokenIds>& hypotheses,
                   const std::vector<TokenIds>& references, int max_n) {
  if (hypotheses.size() != references.size())
    throw std::invalid_argument("hypothesis/reference count mismatch");
  if (hypotheses.empty())
    throw std::invalid_argument("empty corpus for BLEU");

  std::vector<long long> matches(static_cast<std::size_t>(max_n), 0);
  std::vector<long long> totals(static_cast<std::size_t>(max_n), 0);
  long long hyp_len = 0, ref_len = 0;

  for (std::size_t e = 0; e < hypotheses.size(); ++e) {
    const auto& hyp = hypotheses[e];
    const auto& ref = references[e];
    hyp_len += static_cast<long long>(hyp.size());
    ref_len += static_cast<long long>(ref.size());
    for (int n = 1; n <= max_n; ++n) {
      const auto hyp_counts = ngram_counts(hyp, n);
      const auto ref_counts = ngram_counts(ref, n);
      for (const auto& [gram, count] : hyp_counts) {
        totals[static_cast<std::size_t>(n - 1)] += count;
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end())
          matches[static_cast<std::size_t>(n - 1)] +=
              std::min(count, it->second);
      }
    }
  }

  double log_sum = 0.0;
  int used = 0;
  for (int n = 1; n <= max_n; ++n) {
    const long long total = totals[static_cast<std::size_t>(n - 1)];
    if (total == 0) continue;  // order absent from every hypothesis
    const long long match = matches[static_cast<std::size_t>(n - 1)];
    double p;
    if (n == 1) {
      if (match == 0) return 0.0;
      p = static_cast<double>(match) / static_cast<double>(total);
    } else {
      p = (static_cast<double>(match) + 1.0) /
          (static_cast<double>(total) + 1.0);
    }
    log_sum += std::log(p);
    ++used;
  }
  if (used == 0) return 0.0;
  const double geo_mean = std::exp(log_sum / used);
  const double bp =
      hyp_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) /
                               static_cast<double>(hyp_len));
  return 100.0 * bp * geo_mean;
}

void MetricsReport::validate() const {
  if (!(avg_length > 0.0)) throw std::runtime_error("avg_length must be > 0");
  if (!(vocab_pct > 0.0 && vocab_pct <= 100.0))
    throw std::runtime_error("vocab_pct outside (0, 100]");
  if (!(trigram_pct > 0.0 && trigram_pct <= 100.0))
    throw std::runtime_error("trigram_pct outside (0, 100]");
  if (!(bleu >= 0.0 && bleu <= 100.0))
    throw std::runtime_error("bleu outside [0, 100]");
}

EvaluationReport evaluate_generations(const std::vector<TokenIds>& outputs,
                                      const std::vector<TokenIds>& references,
                                      const std::string& label) {
  if (outputs.size() != references.size())
    throw std::invalid_argument("outputs/references misaligned");
  EvaluationReport report;

  const auto sys_div = diversity_metrics(outputs);
  report.system.label = label;
  report.system.bleu = corpus_bleu(outputs, references);
  report.system.avg_length = sys_div.avg_length;
  report.system.vocab_pct = sys_div.vocab_pct;
  report.system.trigram_pct = sys_div.trigram_pct;
  report.system.n_examples = static_cast<int>(outputs.size());
  report.system.validate();

  const auto ref_div = diversity_metrics(references);
  report.reference.label = "reference";
  report.reference.bleu = corpus_bleu(references, references);
  report.reference.avg_length = ref_div.avg_length;
  report.reference.vocab_pct = ref_div.vocab_pct;
  report.reference.trigram_pct = ref_div.trigram_pct;
  report.reference.n_examples = static_cast<int>(references.size());
  report.reference.validate();
  return report;
}

std::string format_report_table(const std::vector<MetricsReport>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(22) << "system" << std::right << std::setw(9)
      << "BLEU" << std::setw(9) << "Length" << std::setw(9) << "Vocab"
      << std::setw(10) << "Trigrams" << std::setw(7) << "N" << "\n";
  out << std::string(66, '-') << "\n";
  out << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    out << std::left << std::setw(22) << r.label << std::right << std::setw(9)
        << r.bleu << std::setw(9) << r.avg_length << std::setw(9)
        << r.vocab_pct << std::setw(10) << r.trigram_pct << std::setw(7)
        << r.n_examples << "\n";
  }
  return out.str();
}

}  // namespace chorus::metrics
