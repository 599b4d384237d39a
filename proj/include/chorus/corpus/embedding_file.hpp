// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_CORPUS_EMBEDDING_FILE_HPP
#define CHORUS_CORPUS_EMBEDDING_FILE_HPP

#include <string>

#include "chorus/corpus/vocab.hpp"
#include "chorus/types.hpp"

namespace chorus::corpus {

// Loads "word v1 v2 ..." lines into the rows of an existing embedding
// matrix. Rows for words absent from the file keep their current values.
// Returns the number of vocabulary rows that were filled.
int load_embedding_file(const std::string& path, const Vocabulary& vocab,
                        Matrix& embedding);

}  // namespace chorus::corpus

#endif  // CHORUS_CORPUS_EMBEDDING_FILE_HPP
