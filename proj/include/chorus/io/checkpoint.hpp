// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_IO_CHECKPOINT_HPP
#define CHORUS_IO_CHECKPOINT_HPP

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "chorus/nn/params.hpp"

namespace chorus::io {

// Single-file binary checkpoint: a magic tag, a JSON header (kind, config
// snapshot, config hash, seed, vocabulary hash), then named raw tensors.
// Loading validates the format version and tensor layout.

inline constexpr char kCheckpointMagic[8] = {'C', 'H', 'O', 'R',
                                             'U', 'S', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointInfo {
  std::string kind;
  std::string config_json;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::uint64_t vocab_hash = 0;
};

namespace detail {

void write_header(std::ofstream& out, const CheckpointInfo& info);
CheckpointInfo read_header(std::ifstream& in, const std::string& path);
void write_tensor(std::ofstream& out, const std::string& name,
                  const double* data, std::uint64_t count);
void read_tensor(std::ifstream& in, const std::string& path,
                 const std::string& name, double* data, std::uint64_t count);
void write_u32(std::ofstream& out, std::uint32_t v);
std::uint32_t read_u32(std::ifstream& in);

}  // namespace detail

template <class P>
void save_checkpoint(const std::string& path, const CheckpointInfo& info,
                     const P& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  detail::write_header(out, info);
  const auto views = nn::flat_views(params);
  detail::write_u32(out, static_cast<std::uint32_t>(views.size()));
  for (const auto& v : views)
    detail::write_tensor(out, v.name, v.data,
                         static_cast<std::uint64_t>(v.size));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

// Reads the header only; used to construct the model before loading tensors.
CheckpointInfo peek_checkpoint(const std::string& path);

template <class P>
CheckpointInfo load_checkpoint(const std::string& path,
                               const std::string& expected_kind, P& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  const CheckpointInfo info = detail::read_header(in, path);
  if (info.kind != expected_kind) {
    throw std::runtime_error("checkpoint kind mismatch in " + path +
                             ": expected " + expected_kind + ", found " +
                             info.kind);
  }
  auto views = nn::flat_views(params);
  const std::uint32_t count = detail::read_u32(in);
  if (count != views.size())
    throw std::runtime_error("checkpoint tensor count mismatch: " + path);
  for (auto& v : views)
    detail::read_tensor(in, path, v.name, v.data,
                        static_cast<std::uint64_t>(v.size));
  return info;
}

}  // namespace chorus::io

#endif  // CHORUS_IO_CHECKPOINT_HPP
