// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/pipeline/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "chorus/corpus/embedding_file.hpp"
#include "chorus/corpus/nli_gen.hpp"
#include "chorus/corpus/pairs.hpp"
#include "chorus/corpus/text.hpp"
#include "chorus/metrics/metrics.hpp"

namespace chorus::pipeline {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void require_file(const std::string& path, const std::string& produced_by) {
  if (!fs::exists(path)) {
    throw MissingPrerequisite("missing artifact " + path + ": run the '" +
                              produced_by + "' stage first");
  }
}

void write_jsonl_header(std::ofstream& out, const char* kind,
                        const PipelineConfig& config,
                        std::uint64_t vocab_hash) {
  ordered_json header;
  header["format_version"] = 1;
  header["kind"] = kind;
  header["config_hash"] = config.config_hash;
  header["seed"] = config.seed;
  header["vocab_hash"] = vocab_hash;
  out << header.dump() << "\n";
}

corpus::Vocabulary load_vocab_checked(const Paths& paths) {
  require_file(paths.vocab(), "prepare");
  return corpus::Vocabulary::load(paths.vocab());
}

std::vector<corpus::Example> load_split(const Paths& paths,
                                        const std::string& split) {
  require_file(paths.examples(split), "prepare");
  return corpus::load_examples(paths.examples(split));
}

std::vector<std::int64_t> freq_by_id(const corpus::Vocabulary& vocab) {
  std::vector<std::int64_t> freq(static_cast<std::size_t>(vocab.size()), 0);
  for (TokenId id = corpus::Vocabulary::kNumSpecials; id < vocab.size(); ++id)
    freq[static_cast<std::size_t>(id)] = vocab.frequency(vocab.token_of(id));
  return freq;
}

struct LoadedScorers {
  scorers::RepetitionScorer repetition;
  scorers::EntailmentScorer entailment;
  scorers::RelevanceScorer relevance;
  scorers::StyleScorer style;

  const scorers::PrefixScorer* by_id(scorers::ScorerId id) const {
    switch (id) {
      case scorers::ScorerId::kRepetition:
        return &repetition;
      case scorers::ScorerId::kEntailment:
        return &entailment;
      case scorers::ScorerId::kRelevance:
        return &relevance;
      case scorers::ScorerId::kStyle:
        return &style;
    }
    throw std::logic_error("unknown scorer id");
  }
};

LoadedScorers load_scorers(const Paths& paths,
                           const std::vector<scorers::ScorerId>& ids) {
  LoadedScorers loaded;
  for (auto id : ids) {
    const std::string path = paths.scorer_ckpt(scorers::to_string(id));
    require_file(path, "train-scorers");
    switch (id) {
      case scorers::ScorerId::kRepetition:
        loaded.repetition = scorers::RepetitionScorer::load(path);
        break;
      case scorers::ScorerId::kEntailment:
        loaded.entailment = scorers::EntailmentScorer::load(path);
        break;
      case scorers::ScorerId::kRelevance:
        loaded.relevance = scorers::RelevanceScorer::load(path);
        break;
      case scorers::ScorerId::kStyle:
        loaded.style = scorers::StyleScorer::load(path);
        break;
    }
  }
  return loaded;
}

ordered_json lambda_json(const objective::MixtureWeights& weights) {
  ordered_json j;
  for (std::size_t i = 0; i < weights.ids.size(); ++i)
    j[scorers::to_string(weights.ids[i])] =
        weights.values[static_cast<Eigen::Index>(i)];
  return j;
}

}  // namespace

void run_prepare(const PipelineConfig& config) {
  const Paths paths{config.out_dir};
  fs::create_directories(config.out_dir);

  const auto documents =
      corpus::read_documents(config.corpus_path, config.corpus_mode);
  const auto built = corpus::build_examples(documents, config.corpus_mode);
  if (built.examples.empty())
    throw std::runtime_error("corpus produced no usable examples");

  const auto split = corpus::split_examples(built.examples, config.seed);
  const auto vocab = corpus::build_vocabulary(split.lm_train, config.vocab_size);
  vocab.save(paths.vocab(), config.config_hash, config.seed);

  const auto h = vocab.hash();
  corpus::save_examples(paths.examples("lm_train"), split.lm_train,
                        config.config_hash, config.seed, h);
  corpus::save_examples(paths.examples("scorer_train"), split.scorer_train,
                        config.config_hash, config.seed, h);
  corpus::save_examples(paths.examples("weight_train"), split.weight_train,
                        config.config_hash, config.seed, h);
  corpus::save_examples(paths.examples("validation"), split.validation,
                        config.config_hash, config.seed, h);
  corpus::save_examples(paths.examples("test"), split.test,
                        config.config_hash, config.seed, h);

  ordered_json meta;
  meta["format_version"] = 1;
  meta["kind"] = "prepare_meta";
  meta["config_hash"] = config.config_hash;
  meta["seed"] = config.seed;
  meta["vocab_hash"] = h;
  meta["documents"] = documents.size();
  meta["skipped_documents"] = built.skipped_documents;
  meta["examples"] = built.examples.size();
  meta["splits"] = {{"lm_train", split.lm_train.size()},
                    {"scorer_train", split.scorer_train.size()},
                    {"weight_train", split.weight_train.size()},
                    {"validation", split.validation.size()},
                    {"test", split.test.size()}};
  meta["vocabulary"] = vocab.size();
  std::ofstream(paths.prepare_meta(), std::ios::binary) << meta.dump(2) << "\n";
  std::cout << "prepare: " << built.examples.size() << " examples ("
            << built.skipped_documents << " documents skipped), vocabulary "
            << vocab.size() << "\n";
}

void run_train_lm(const PipelineConfig& config) {
  const Paths paths{config.out_dir};
  const auto vocab = load_vocab_checked(paths);
  const auto train = load_split(paths, "lm_train");
  const auto valid = load_split(paths, "validation");

  const TokenIds train_stream = corpus::lm_token_stream(train, vocab);
  const TokenIds valid_stream = corpus::lm_token_stream(valid, vocab);

  const Matrix* initial_embedding = nullptr;
  Matrix loaded_embedding;
  if (!config.embedding_file.empty()) {
    lm::LanguageModel fresh(vocab.size(), freq_by_id(vocab), config.lm,
                            vocab.hash());
    loaded_embedding = fresh.params().embedding;
    corpus::load_embedding_file(config.embedding_file, vocab,
                                loaded_embedding);
    initial_embedding = &loaded_embedding;
  }

  lm::LmTrainReport report;
  const lm::LanguageModel model = lm::train_lm(
      train_stream, valid_stream, freq_by_id(vocab), vocab.size(), config.lm,
      config.lm_train, vocab.hash(), &report, initial_embedding);

  model.save(paths.lm_ckpt(), config.config_hash, config.seed);

  std::ofstream log(paths.lm_log(), std::ios::binary);
  write_jsonl_header(log, "lm_train_log", config, vocab.hash());
  for (const auto& check : report.checks) {
    ordered_json rec;
    rec["batch"] = check.batch;
    rec["train_loss"] = check.train_loss;
    rec["valid_perplexity"] = check.valid_perplexity;
    rec["learning_rate"] = check.learning_rate;
    log << rec.dump() << "\n";
  }
  ordered_json final_rec;
  final_rec["final_valid_perplexity"] = report.final_valid_perplexity;
  log << final_rec.dump() << "\n";
  std::cout << "train-lm: final validation perplexity "
            << report.final_valid_perplexity << "\n";
}

namespace {

std::vector<objective::WeightExample> to_weight_examples(
    const std::vector<corpus::Example>& examples,
    const corpus::Vocabulary& vocab) {
  std::vector<objective::WeightExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples)
    out.push_back({vocab.encode(ex.context), vocab.encode(ex.continuation)});
  return out;
}

}  // namespace

void run_train_scorers(const PipelineConfig& config) {
  const Paths paths{config.out_dir};
  const auto vocab = load_vocab_checked(paths);
  require_file(paths.lm_ckpt(), "train-lm");
  const auto model = lm::LanguageModel::load(paths.lm_ckpt());
  if (model.vocab_hash() != vocab.hash())
    throw std::runtime_error("language model was trained on a different "
                             "vocabulary");
  const auto examples = load_split(paths, "scorer_train");
  const std::uint64_t h = vocab.hash();

  const auto lm_pairs = corpus::make_ranking_pairs(
      examples, corpus::NegativeKind::kLmSample, &model, vocab,
      config.prefix_fractions, derive_seed(config.seed, 0xa1, 1),
      config.pair_sample_temperature);
  corpus::save_ranking_pairs(paths.pairs("lm_sample"), lm_pairs,
                             config.config_hash, config.seed, h);
  const auto random_pairs = corpus::make_ranking_pairs(
      examples, corpus::NegativeKind::kRandomEnding, nullptr, vocab,
      config.prefix_fractions, derive_seed(config.seed, 0xa1, 2));
  corpus::save_ranking_pairs(paths.pairs("random_ending"), random_pairs,
                             config.config_hash, config.seed, h);

  ordered_json log;
  log["format_version"] = 1;
  log["kind"] = "scorers_log";
  log["config_hash"] = config.config_hash;
  log["seed"] = config.seed;
  log["vocab_hash"] = h;

  {
    scorers::RepetitionScorer scorer(vocab.size(), config.repetition, h);
    if (!config.embedding_file.empty())
      corpus::load_embedding_file(config.embedding_file, vocab,
                                  scorer.params().embedding);
    const auto report =
        scorers::train_ranking_scorer(scorer, lm_pairs, config.ranking_train);
    scorer.save(paths.scorer_ckpt("repetition"), config.config_hash,
                config.seed);
    log["repetition"] = {{"pairs", lm_pairs.size()},
                         {"ranking_accuracy", report.train_accuracy},
                         {"epoch_losses", report.epoch_losses}};
  }
  {
    scorers::RelevanceScorer scorer(vocab.size(), config.relevance, h);
    if (!config.embedding_file.empty())
      corpus::load_embedding_file(config.embedding_file, vocab,
                                  scorer.params().embedding);
    const auto report = scorers::train_ranking_scorer(scorer, random_pairs,
                                                      config.ranking_train);
    scorer.save(paths.scorer_ckpt("relevance"), config.config_hash,
                config.seed);
    log["relevance"] = {{"pairs", random_pairs.size()},
                        {"ranking_accuracy", report.train_accuracy},
                        {"epoch_losses", report.epoch_losses}};
  }
  {
    scorers::StyleScorer scorer(vocab.size(), config.style, h);
    if (!config.embedding_file.empty())
      corpus::load_embedding_file(config.embedding_file, vocab,
                                  scorer.params().embedding);
    const auto report =
        scorers::train_ranking_scorer(scorer, lm_pairs, config.ranking_train);
    scorer.save(paths.scorer_ckpt("style"), config.config_hash, config.seed);
    log["style"] = {{"pairs", lm_pairs.size()},
                    {"ranking_accuracy", report.train_accuracy},
                    {"epoch_losses", report.epoch_losses}};
  }
  {
    auto triples = corpus::generate_synthetic_nli(
        vocab, config.nli_count, derive_seed(config.seed, 0xa1, 3));
    // Ground the classifier in corpus-shaped sentences as well: unrelated
    // sentence pairs are neutral, identical ones entailment. Without this
    // the decoder-facing inputs are far outside the synthetic templates and
    // the scorer is confidently wrong on them.
    {
      std::vector<TokenIds> sentences;
      for (const auto& ex : examples) {
        const TokenIds ids = vocab.encode(ex.continuation);
        for (const auto& [b, e] : ex.continuation_spans)
          sentences.emplace_back(ids.begin() + b, ids.begin() + e);
      }
      Rng rng(derive_seed(config.seed, 0xa1, 4));
      const int extra = config.nli_count / 3;
      for (int i = 0; i < extra && sentences.size() >= 2; ++i) {
        const auto& a = sentences[static_cast<std::size_t>(
            rng.uniform_int(static_cast<int>(sentences.size())))];
        if (i % 2 == 0) {
          triples.push_back({a, a, corpus::NliLabel::kEntailment});
        } else {
          const auto& b = sentences[static_cast<std::size_t>(
              rng.uniform_int(static_cast<int>(sentences.size())))];
          if (a == b) continue;
          triples.push_back({a, b, corpus::NliLabel::kNeutral});
        }
      }
    }
    Rng shuffle_rng(derive_seed(config.seed, 0xa1, 5));
    shuffle_rng.shuffle(triples);
    corpus::save_nli_triples(paths.nli_triples(), triples, config.config_hash,
                             config.seed, h);
    const auto holdout_count = static_cast<std::size_t>(
        config.nli_holdout_fraction * static_cast<double>(triples.size()));
    std::vector<corpus::NliTriple> holdout(triples.end() -
                                               static_cast<std::ptrdiff_t>(
                                                   holdout_count),
                                           triples.end());
    triples.resize(triples.size() - holdout_count);

    scorers::EntailmentScorer scorer(vocab.size(), config.entailment, h,
                                     vocab.terminator_ids());
    if (!config.embedding_file.empty())
      corpus::load_embedding_file(config.embedding_file, vocab,
                                  scorer.params().embedding);
    const auto report = scorers::train_nli(scorer, triples, config.nli_train);
    scorer.save(paths.scorer_ckpt("entailment"), config.config_hash,
                config.seed);
    const double holdout_acc =
        holdout.empty() ? 0.0 : scorers::nli_accuracy(scorer, holdout);
    log["entailment"] = {{"train_triples", triples.size()},
                         {"holdout_triples", holdout.size()},
                         {"train_accuracy", report.train_accuracy},
                         {"holdout_accuracy", holdout_acc},
                         {"epoch_losses", report.epoch_losses}};
  }

  std::ofstream(paths.scorers_log(), std::ios::binary) << log.dump(2) << "\n";
  std::cout << "train-scorers: wrote 4 checkpoints\n";
}

void run_learn_weights(const PipelineConfig& config,
                       const std::vector<scorers::ScorerId>& active,
                       const std::string& label) {
  const Paths paths{config.out_dir};
  const auto vocab = load_vocab_checked(paths);
  require_file(paths.lm_ckpt(), "train-lm");
  const auto model = lm::LanguageModel::load(paths.lm_ckpt());
  const auto loaded = load_scorers(paths, active);

  std::vector<const scorers::PrefixScorer*> scorer_set;
  for (auto id : active) scorer_set.push_back(loaded.by_id(id));

  auto objective = objective::make_objective(model, scorer_set);
  const auto weight_examples =
      to_weight_examples(load_split(paths, "weight_train"), vocab);

  auto decode = [&](const TokenIds& x,
                    const objective::CompositeObjective<lm::LanguageModel>& obj,
                    std::uint64_t seed) {
    const decoding::BeamSearch<lm::LanguageModel> search(
        obj, config.beam, vocab.terminator_ids());
    return search.generate(x, seed).continuation;
  };
  const auto report = objective::learn_mixture_weights(
      objective, weight_examples, decode, config.mixture);

  report.weights.save(paths.lambda(label), config.config_hash, config.seed,
                      vocab.hash());
  std::ofstream trace(paths.mixture_trace(label), std::ios::binary);
  write_jsonl_header(trace, "mixture_trace", config, vocab.hash());
  for (const auto& point : report.trace) {
    ordered_json rec;
    rec["step"] = point.step;
    rec["loss"] = point.loss;
    ordered_json lam;
    for (std::size_t i = 0; i < report.weights.ids.size(); ++i)
      lam[scorers::to_string(report.weights.ids[i])] =
          point.lambda[static_cast<Eigen::Index>(i)];
    rec["lambda"] = lam;
    trace << rec.dump() << "\n";
  }
  std::cout << "learn-weights(" << label << "): done, "
            << report.trace.size() << " online steps\n";
}

void run_generate(const PipelineConfig& config, GenerateMode mode,
                  scorers::ScorerId ablation_scorer, const std::string& label) {
  const Paths paths{config.out_dir};
  const auto vocab = load_vocab_checked(paths);
  require_file(paths.lm_ckpt(), "train-lm");
  const auto model = lm::LanguageModel::load(paths.lm_ckpt());

  std::vector<scorers::ScorerId> active;
  if (mode == GenerateMode::kFull) active = kAllScorers;
  if (mode == GenerateMode::kAblation) active = {ablation_scorer};
  const auto loaded = load_scorers(paths, active);
  std::vector<const scorers::PrefixScorer*> scorer_set;
  for (auto id : active) scorer_set.push_back(loaded.by_id(id));

  auto objective = objective::make_objective(model, scorer_set);
  decoding::BeamConfig beam = config.beam;
  if (mode == GenerateMode::kBaseline) {
    beam.beam_size = config.baseline_beam_size;
    beam.temperature = 0.0;  // deterministic plain beam search
  } else {
    const std::string lambda_label =
        mode == GenerateMode::kFull
            ? "full"
            : std::string("only-") + scorers::to_string(ablation_scorer);
    require_file(paths.lambda(lambda_label), "learn-weights");
    const auto lambda = objective::MixtureWeights::load(paths.lambda(lambda_label));
    if (lambda.vocab_hash != vocab.hash())
      throw std::runtime_error(
          "mixture weights were learned on a different vocabulary");
    // Align stored weights with the active scorer order.
    for (std::size_t i = 0; i < objective.weights.ids.size(); ++i)
      objective.weights.values[static_cast<Eigen::Index>(i)] =
          lambda.weights.value_of(objective.weights.ids[i]);
    objective.validate();
  }

  const decoding::BeamSearch<lm::LanguageModel> decoder(objective, beam,
                                                        vocab.terminator_ids());

  auto test = load_split(paths, "test");
  if (config.generate_limit > 0 &&
      static_cast<int>(test.size()) > config.generate_limit)
    test.resize(static_cast<std::size_t>(config.generate_limit));

  std::ofstream out(paths.generations(label), std::ios::binary);
  write_jsonl_header(out, "generations", config, vocab.hash());
  int warnings = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const TokenIds context = vocab.encode(test[i].context);
    const std::uint64_t seed =
        derive_seed(config.seed, 0x9e4, static_cast<std::uint64_t>(i));
    const auto result = decoder.generate(context, seed);
    if (result.warning) ++warnings;

    ordered_json rec;
    rec["index"] = i;
    rec["seed"] = seed;
    rec["context"] = test[i].context;
    rec["continuation"] = vocab.decode(result.continuation);
    rec["score"] = result.score;
    rec["lm_logprob"] = result.final_lm_logprob;
    rec["warning"] = result.warning;
    ordered_json components;
    for (std::size_t s = 0; s < objective.scorer_set.size(); ++s)
      components[scorers::to_string(objective.scorer_set[s]->id())] =
          result.final_scorer_values[static_cast<Eigen::Index>(s)];
    rec["scorer_components"] = components;
    rec["lambda"] = lambda_json(objective.weights);
    ordered_json steps = ordered_json::array();
    for (const auto& t : result.trace) {
      ordered_json step;
      step["step"] = t.step;
      step["best_score"] = t.best_score;
      step["beam_scores"] = t.beam_scores;
      steps.push_back(std::move(step));
    }
    rec["steps"] = steps;
    out << rec.dump() << "\n";
  }
  std::cout << "generate(" << label << "): " << test.size()
            << " continuations, " << warnings << " forced terminations\n";
}

std::vector<Tokens> load_generation_continuations(
    const std::string& path, std::uint64_t expected_vocab_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read generations: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty generations file: " + path);
  const auto header = nlohmann::json::parse(line);
  if (header.at("kind") != "generations")
    throw std::runtime_error("not a generations file: " + path);
  if (expected_vocab_hash != 0 &&
      header.at("vocab_hash").get<std::uint64_t>() != expected_vocab_hash)
    throw std::runtime_error(
        "vocabulary hash mismatch: " + path +
        " was generated against a different vocabulary");
  std::vector<Tokens> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    out.push_back(rec.at("continuation").get<Tokens>());
  }
  return out;
}

void run_evaluate(const PipelineConfig& config,
                  const std::vector<std::string>& system_labels,
                  const std::string& report_name) {
  const Paths paths{config.out_dir};
  const auto vocab = load_vocab_checked(paths);
  const auto test = load_split(paths, "test");

  std::vector<metrics::MetricsReport> rows;
  ordered_json systems = ordered_json::array();
  metrics::MetricsReport reference_row;

  for (const auto& label : system_labels) {
    require_file(paths.generations(label), "generate");
    const auto continuations =
        load_generation_continuations(paths.generations(label), vocab.hash());
    if (continuations.size() > test.size())
      throw std::runtime_error("more generations than test references");
    std::vector<TokenIds> outputs, references;
    for (std::size_t i = 0; i < continuations.size(); ++i) {
      outputs.push_back(vocab.encode(continuations[i]));
      references.push_back(vocab.encode(test[i].continuation));
    }
    const auto report = metrics::evaluate_generations(outputs, references,
                                                      label);
    rows.push_back(report.system);
    reference_row = report.reference;

    ordered_json sys;
    sys["label"] = report.system.label;
    sys["bleu"] = report.system.bleu;
    sys["avg_length"] = report.system.avg_length;
    sys["vocab_pct"] = report.system.vocab_pct;
    sys["trigram_pct"] = report.system.trigram_pct;
    sys["n_examples"] = report.system.n_examples;
    systems.push_back(std::move(sys));
  }
  rows.push_back(reference_row);

  ordered_json j;
  j["format_version"] = 1;
  j["kind"] = "report";
  j["config_hash"] = config.config_hash;
  j["seed"] = config.seed;
  j["vocab_hash"] = vocab.hash();
  j["bleu_notes"] =
      "corpus BLEU, max n = 4, add-one smoothing on n >= 2, zero-count "
      "orders skipped";
  j["meteor"] = "unavailable (no external aligner)";
  j["systems"] = systems;
  j["reference"] = {{"label", reference_row.label},
                    {"bleu", reference_row.bleu},
                    {"avg_length", reference_row.avg_length},
                    {"vocab_pct", reference_row.vocab_pct},
                    {"trigram_pct", reference_row.trigram_pct},
                    {"n_examples", reference_row.n_examples}};
  std::ofstream(paths.report_json(report_name), std::ios::binary)
      << j.dump(2) << "\n";

  const std::string table = metrics::format_report_table(rows);
  std::ofstream(paths.report_txt(report_name), std::ios::binary) << table;
  std::cout << table;
}

void run_ablate(const PipelineConfig& config) {
  for (auto id : kAllScorers) {
    const std::string label = std::string("only-") + scorers::to_string(id);
    run_learn_weights(config, {id}, label);
    run_generate(config, GenerateMode::kAblation, id, label);
  }
  std::vector<std::string> labels;
  for (auto id : kAllScorers)
    labels.push_back(std::string("only-") + scorers::to_string(id));
  run_evaluate(config, labels, "ablate");
}

}  // namespace chorus::pipeline
