// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "chorus/objective/objective.hpp"

namespace chorus::objective {

MixtureWeights MixtureWeights::uniform(
    const std::vector<scorers::ScorerId>& ids, double value) {
  MixtureWeights w;
  w.ids = ids;
  w.values = Vector::Constant(static_cast<Eigen::Index>(ids.size()), value);
  return w;
}

int MixtureWeights::index_of(scorers::ScorerId id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return static_cast<int>(i);
  return -1;
}

double MixtureWeights::value_of(scorers::ScorerId id) const {
  const int i = index_of(id);
  if (i < 0)
    throw std::invalid_argument(std::string("no weight for scorer ") +
                                scorers::to_string(id));
  return values[i];
}

void MixtureWeights::save(const std::string& path, std::uint64_t config_hash,
                          std::uint64_t seed,
                          std::uint64_t vocab_hash) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write mixture weights: " + path);
  nlohmann::ordered_json j;
  j["format_version"] = 1;
  j["kind"] = "mixture_weights";
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["vocab_hash"] = vocab_hash;
  nlohmann::ordered_json lambda;
  for (std::size_t i = 0; i < ids.size(); ++i)
    lambda[scorers::to_string(ids[i])] = values[static_cast<Eigen::Index>(i)];
  j["lambda"] = lambda;
  out << j.dump(2) << "\n";
}

MixtureWeights::LoadResult MixtureWeights::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read mixture weights: " + path);
  nlohmann::json j;
  in >> j;
  if (j.at("kind") != "mixture_weights")
    throw std::runtime_error("not a mixture-weight file: " + path);
  LoadResult result;
  result.vocab_hash = j.at("vocab_hash").get<std::uint64_t>();
  const auto& lambda = j.at("lambda");
  std::vector<scorers::ScorerId> ids;
  std::vector<double> vals;
  for (auto it = lambda.begin(); it != lambda.end(); ++it) {
    ids.push_back(scorers::scorer_id_from_string(it.key()));
    vals.push_back(it.value().get<double>());
  }
  result.weights.ids = ids;
  result.weights.values =
      Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return result;
}

}  // namespace chorus::objective
