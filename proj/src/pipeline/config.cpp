// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/pipeline/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chorus::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty() || key.empty())
      throw std::runtime_error("config line " + std::to_string(line_no) +
                               ": key outside a [section]");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

void ConfigFile::apply_override(const std::string& spec) {
  const auto eq = spec.find('=');
  const auto dot = spec.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw std::invalid_argument("override must be section.key=value: " + spec);
  const std::string section = trim(spec.substr(0, dot));
  const std::string key = trim(spec.substr(dot + 1, eq - dot - 1));
  const std::string value = trim(spec.substr(eq + 1));
  if (section.empty() || key.empty())
    throw std::invalid_argument("override must be section.key=value: " + spec);
  sections_[section][key] = value;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

int ConfigFile::get_int(const std::string& section, const std::string& key,
                        int fallback) const {
  if (!has(section, key)) return fallback;
  return std::stoi(get(section, key, ""));
}

double ConfigFile::get_double(const std::string& section,
                              const std::string& key, double fallback) const {
  if (!has(section, key)) return fallback;
  return std::stod(get(section, key, ""));
}

std::uint64_t ConfigFile::get_u64(const std::string& section,
                                  const std::string& key,
                                  std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  return std::stoull(get(section, key, ""));
}

std::string ConfigFile::canonical() const {
  std::ostringstream out;
  for (const auto& [section, kv] : sections_) {
    for (const auto& [key, value] : kv) {
      // The output location does not affect artifact content.
      if (section == "run" && key == "out_dir") continue;
      out << section << "." << key << "=" << value << "\n";
    }
  }
  return out.str();
}

std::uint64_t ConfigFile::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw std::runtime_error("empty prefix fraction list");
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_config(const ConfigFile& file) {
  PipelineConfig c;
  c.corpus_path = file.get("corpus", "path", "");
  if (c.corpus_path.empty())
    throw std::runtime_error("config: corpus.path is required");
  c.corpus_mode =
      corpus::corpus_mode_from_string(file.get("corpus", "mode", "review"));
  c.vocab_size = file.get_int("corpus", "vocab_size", 2000);

  c.seed = file.get_u64("run", "seed", 7);
  c.out_dir = file.get("run", "out_dir", "out");
  c.generate_limit = file.get_int("run", "generate_limit", 0);
  c.embedding_file = file.get("run", "embedding_file", "");

  c.lm.emb_dim = file.get_int("lm", "emb_dim", 64);
  c.lm.hidden_dim = file.get_int("lm", "hidden_dim", 128);
  c.lm.num_clusters = file.get_int("lm", "clusters", 3);
  c.lm.init_scale = file.get_double("lm", "init_scale", 0.05);
  c.lm.seed = file.get_u64("lm", "seed", c.seed);

  c.lm_train.learning_rate = file.get_double("lm", "learning_rate", 1.0);
  c.lm_train.anneal_factor = file.get_double("lm", "anneal_factor", 0.5);
  c.lm_train.batch_size = file.get_int("lm", "batch_size", 16);
  c.lm_train.bptt_len = file.get_int("lm", "bptt_len", 35);
  c.lm_train.grad_clip = file.get_double("lm", "grad_clip", 0.25);
  c.lm_train.dropout = file.get_double("lm", "dropout", 0.2);
  c.lm_train.check_interval = file.get_int("lm", "check_interval", 50);
  c.lm_train.epochs = file.get_int("lm", "epochs", 3);
  c.lm_train.seed = c.lm.seed;

  auto scorer_common = [&](const char* name, int& emb, double& scale,
                           double& dropout, std::uint64_t& seed,
                           double dropout_default) {
    emb = file.get_int(name, "emb_dim", 64);
    scale = file.get_double(name, "init_scale", 0.05);
    dropout = file.get_double(name, "dropout", dropout_default);
    seed = file.get_u64(name, "seed", derive_seed(c.seed, 0x5c0, 0));
  };
  scorer_common("repetition", c.repetition.emb_dim, c.repetition.init_scale,
                c.repetition.dropout, c.repetition.seed, 0.5);
  c.repetition.hidden_dim = file.get_int("repetition", "hidden_dim", 32);
  c.repetition.window = file.get_int("repetition", "window", 8);

  scorer_common("relevance", c.relevance.emb_dim, c.relevance.init_scale,
                c.relevance.dropout, c.relevance.seed, 0.5);
  c.relevance.filters = file.get_int("relevance", "filters", 32);
  c.relevance.filter_width = file.get_int("relevance", "filter_width", 3);

  scorer_common("style", c.style.emb_dim, c.style.init_scale, c.style.dropout,
                c.style.seed, 0.5);

  scorer_common("entailment", c.entailment.emb_dim, c.entailment.init_scale,
                c.entailment.dropout, c.entailment.seed, 0.2);
  c.entailment.proj_dim = file.get_int("entailment", "proj_dim", 200);
  c.entailment.hidden_dim = file.get_int("entailment", "hidden_dim", 200);

  c.ranking_train.learning_rate =
      file.get_double("scorers", "learning_rate", 0.01);
  c.ranking_train.batch_size = file.get_int("scorers", "batch_size", 64);
  c.ranking_train.epochs = file.get_int("scorers", "epochs", 10);
  c.ranking_train.seed = derive_seed(c.seed, 0x7a41, 0);

  c.nli_train.learning_rate = file.get_double("nli", "learning_rate", 1.0);
  c.nli_train.batch_size = file.get_int("nli", "batch_size", 16);
  c.nli_train.epochs = file.get_int("nli", "epochs", 10);
  c.nli_train.seed = derive_seed(c.seed, 0x01f1, 0);
  c.nli_count = file.get_int("nli", "count", 300);
  c.nli_holdout_fraction = file.get_double("nli", "holdout_fraction", 0.2);

  if (file.has("pairs", "prefix_fractions"))
    c.prefix_fractions =
        parse_fractions(file.get("pairs", "prefix_fractions", ""));
  c.pair_sample_temperature =
      file.get_double("pairs", "sample_temperature", 1.0);

  c.mixture.learning_rate = file.get_double("mixture", "learning_rate", 0.01);
  c.mixture.epochs = file.get_int("mixture", "epochs", 1);
  c.mixture.seed = derive_seed(c.seed, 0x314, 0);

  c.beam.beam_size = file.get_int("beam", "beam_size", 10);
  c.beam.temperature = file.get_double("beam", "temperature", 1.8);
  c.beam.max_steps = file.get_int("beam", "max_steps", 150);
  c.beam.target_sentences = file.get_int("beam", "target_sentences", 5);
  c.beam.seed = c.seed;
  c.baseline_beam_size = file.get_int("beam", "baseline_beam_size", 5);

  c.config_hash = file.hash();
  return c;
}

}  // namespace chorus::pipeline
