// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_PIPELINE_CONFIG_HPP
#define CHORUS_PIPELINE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chorus/decoding/beam.hpp"
#include "chorus/lm/model.hpp"
#include "chorus/lm/train.hpp"
#include "chorus/objective/objective.hpp"
#include "chorus/scorers/entailment.hpp"
#include "chorus/scorers/ranking_train.hpp"
#include "chorus/scorers/relevance.hpp"
#include "chorus/scorers/repetition.hpp"
#include "chorus/scorers/style.hpp"

namespace chorus::pipeline {

// Key-value config file with [section] headers; '#' starts a comment.
// Command-line overrides take "section.key=value" form. The config hash is
// computed over the canonical (sorted, resolved) key-value listing and is
// embedded in every artifact.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  void apply_override(const std::string& spec);  // "section.key=value"

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  int get_int(const std::string& section, const std::string& key,
              int fallback) const;
  double get_double(const std::string& section, const std::string& key,
                    double fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key,
                        std::uint64_t fallback) const;

  std::string canonical() const;
  std::uint64_t hash() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct PipelineConfig {
  // corpus
  std::string corpus_path;
  corpus::CorpusMode corpus_mode = corpus::CorpusMode::kReview;
  int vocab_size = 2000;

  // model/training configs
  lm::LmConfig lm;
  lm::LmTrainConfig lm_train;
  scorers::RepetitionConfig repetition;
  scorers::RelevanceConfig relevance;
  scorers::StyleConfig style;
  scorers::EntailmentConfig entailment;
  scorers::RankingTrainConfig ranking_train;
  scorers::NliTrainConfig nli_train;
  int nli_count = 300;
  double nli_holdout_fraction = 0.2;

  std::vector<double> prefix_fractions = corpus::kDefaultPrefixFractions;
  double pair_sample_temperature = 1.0;

  objective::MixtureLearnConfig mixture;
  decoding::BeamConfig beam;
  int baseline_beam_size = 5;

  // run
  std::string out_dir = "out";
  std::uint64_t seed = 7;
  int generate_limit = 0;  // 0 = whole test split
  std::string embedding_file;

  std::uint64_t config_hash = 0;

  static PipelineConfig from_config(const ConfigFile& file);
};

}  // namespace chorus::pipeline

#endif  // CHORUS_PIPELINE_CONFIG_HPP
