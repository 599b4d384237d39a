// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_PIPELINE_PIPELINE_HPP
#define CHORUS_PIPELINE_PIPELINE_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "chorus/pipeline/config.hpp"

namespace chorus::pipeline {

// A stage was invoked before the stage that produces its inputs.
struct MissingPrerequisite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Paths {
  std::string out_dir;

  std::string vocab() const { return out_dir + "/vocab.txt"; }
  std::string examples(const std::string& split) const {
    return out_dir + "/examples_" + split + ".jsonl";
  }
  std::string prepare_meta() const { return out_dir + "/prepare_meta.json"; }
  std::string lm_ckpt() const { return out_dir + "/lm.ckpt"; }
  std::string lm_log() const { return out_dir + "/lm_train_log.jsonl"; }
  std::string scorer_ckpt(const std::string& name) const {
    return out_dir + "/scorer_" + name + ".ckpt";
  }
  std::string scorers_log() const { return out_dir + "/scorers_log.json"; }
  std::string pairs(const std::string& kind) const {
    return out_dir + "/pairs_" + kind + ".jsonl";
  }
  std::string nli_triples() const { return out_dir + "/nli_train.jsonl"; }
  std::string lambda(const std::string& label) const {
    return out_dir + "/lambda_" + label + ".json";
  }
  std::string mixture_trace(const std::string& label) const {
    return out_dir + "/mixture_trace_" + label + ".jsonl";
  }
  std::string generations(const std::string& label) const {
    return out_dir + "/generations_" + label + ".jsonl";
  }
  std::string report_json(const std::string& name) const {
    return out_dir + "/report_" + name + ".json";
  }
  std::string report_txt(const std::string& name) const {
    return out_dir + "/report_" + name + ".txt";
  }
};

enum class GenerateMode { kFull, kBaseline, kAblation };

inline const std::vector<scorers::ScorerId> kAllScorers = {
    scorers::ScorerId::kRepetition, scorers::ScorerId::kEntailment,
    scorers::ScorerId::kRelevance, scorers::ScorerId::kStyle};

void run_prepare(const PipelineConfig& config);
void run_train_lm(const PipelineConfig& config);
void run_train_scorers(const PipelineConfig& config);
void run_learn_weights(const PipelineConfig& config,
                       const std::vector<scorers::ScorerId>& active,
                       const std::string& label);
void run_generate(const PipelineConfig& config, GenerateMode mode,
                  scorers::ScorerId ablation_scorer, const std::string& label);
void run_evaluate(const PipelineConfig& config,
                  const std::vector<std::string>& system_labels,
                  const std::string& report_name);
void run_ablate(const PipelineConfig& config);

// Continuations (token strings) from a generation-record file; validates the
// vocabulary hash when expected_vocab_hash is nonzero.
std::vector<Tokens> load_generation_continuations(
    const std::string& path, std::uint64_t expected_vocab_hash);

}  // namespace chorus::pipeline

#endif  // CHORUS_PIPELINE_PIPELINE_HPP
