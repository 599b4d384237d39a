// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/corpus/embedding_file.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chorus::corpus {

int load_embedding_file(const std::string& path, const Vocabulary& vocab,
                        Matrix& embedding) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read embedding file: " + path);
  const Eigen::Index dim = embedding.cols();
  int filled = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (!vocab.contains(word)) continue;
    const TokenId id = vocab.id_of(word);
    for (Eigen::Index d = 0; d < dim; ++d) {
      double v;
      if (!(ss >> v))
        throw std::runtime_error("embedding file " + path + " line " +
                                 std::to_string(line_no) +
                                 ": expected " + std::to_string(dim) +
                                 " values");
      embedding(id, d) = v;
    }
    ++filled;
  }
  return filled;
}

}  // namespace chorus::corpus
