// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chorus/pipeline/pipeline.hpp"

namespace {

using chorus::pipeline::ConfigFile;
using chorus::pipeline::GenerateMode;
using chorus::pipeline::MissingPrerequisite;
using chorus::pipeline::PipelineConfig;

PipelineConfig resolve_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
  ConfigFile file = ConfigFile::parse_file(config_path);
  for (const auto& o : overrides) file.apply_override(o);
  return PipelineConfig::from_config(file);
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "chorus: discriminator-guided continuation generation pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_path, "pipeline config file")
      ->required();
  app.add_option("--set", overrides,
                 "override a config value (section.key=value)");

  auto* prepare = app.add_subcommand(
      "prepare", "segment the corpus, build splits and the vocabulary");
  auto* train_lm =
      app.add_subcommand("train-lm", "train the base language model");
  auto* train_scorers = app.add_subcommand(
      "train-scorers", "build training pairs and train all four scorers");
  auto* learn_weights = app.add_subcommand(
      "learn-weights", "learn mixture weights online with beam decoding");
  auto* generate =
      app.add_subcommand("generate", "decode continuations for the test set");
  auto* evaluate =
      app.add_subcommand("evaluate", "score generated systems against the "
                         "reference continuations");
  auto* ablate = app.add_subcommand(
      "ablate", "learn-weights + generate + evaluate per single scorer");

  std::string mode = "full";
  std::string ablation_scorer = "repetition";
  generate->add_option("--mode", mode,
                       "full | lm-baseline | ablation");
  generate->add_option("--scorer", ablation_scorer,
                       "scorer for ablation mode");

  std::string systems = "full,lm-baseline";
  std::string report_name;
  evaluate->add_option("--systems", systems,
                       "comma-separated generation labels to compare");
  evaluate->add_option("--report", report_name,
                       "report file suffix (default: joined labels)");

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig config = resolve_config(config_path, overrides);
    if (prepare->parsed()) {
      chorus::pipeline::run_prepare(config);
    } else if (train_lm->parsed()) {
      chorus::pipeline::run_train_lm(config);
    } else if (train_scorers->parsed()) {
      chorus::pipeline::run_train_scorers(config);
    } else if (learn_weights->parsed()) {
      chorus::pipeline::run_learn_weights(config, chorus::pipeline::kAllScorers,
                                          "full");
    } else if (generate->parsed()) {
      if (mode == "full") {
        chorus::pipeline::run_generate(config, GenerateMode::kFull,
                                       chorus::scorers::ScorerId::kRepetition,
                                       "full");
      } else if (mode == "lm-baseline") {
        chorus::pipeline::run_generate(config, GenerateMode::kBaseline,
                                       chorus::scorers::ScorerId::kRepetition,
                                       "lm-baseline");
      } else if (mode == "ablation") {
        const auto id = chorus::scorers::scorer_id_from_string(ablation_scorer);
        chorus::pipeline::run_generate(
            config, GenerateMode::kAblation, id,
            std::string("only-") + chorus::scorers::to_string(id));
      } else {
        std::cerr << "unknown generate mode: " << mode << "\n";
        return 2;
      }
    } else if (evaluate->parsed()) {
      const auto labels = split_csv(systems);
      if (labels.empty()) {
        std::cerr << "evaluate: no systems given\n";
        return 2;
      }
      std::string name = report_name;
      if (name.empty()) {
        for (const auto& l : labels) {
          if (!name.empty()) name += "_vs_";
          name += l;
        }
      }
      chorus::pipeline::run_evaluate(config, labels, name);
    } else if (ablate->parsed()) {
      chorus::pipeline::run_ablate(config);
    }
  } catch (const MissingPrerequisite& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
