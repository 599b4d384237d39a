// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#include "chorus/io/checkpoint.hpp"

#include <cstring>

#include <json.hpp>

namespace chorus::io {
namespace detail {

void write_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

namespace {

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void write_string(std::ofstream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
  const std::uint32_t len = read_u32(in);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  return s;
}

}  // namespace

void write_header(std::ofstream& out, const CheckpointInfo& info) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u32(out, kCheckpointVersion);
  nlohmann::ordered_json header;
  header["kind"] = info.kind;
  header["config_hash"] = info.config_hash;
  header["seed"] = info.seed;
  header["vocab_hash"] = info.vocab_hash;
  header["config"] = info.config_json;
  write_string(out, header.dump());
}

CheckpointInfo read_header(std::ifstream& in, const std::string& path) {
  char magic[sizeof(kCheckpointMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw std::runtime_error("not a chorus checkpoint: " + path);
  const std::uint32_t version = read_u32(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path);
  const auto header = nlohmann::json::parse(read_string(in));
  CheckpointInfo info;
  info.kind = header.at("kind").get<std::string>();
  info.config_hash = header.at("config_hash").get<std::uint64_t>();
  info.seed = header.at("seed").get<std::uint64_t>();
  info.vocab_hash = header.at("vocab_hash").get<std::uint64_t>();
  info.config_json = header.at("config").get<std::string>();
  return info;
}

void write_tensor(std::ofstream& out, const std::string& name,
                  const double* data, std::uint64_t count) {
  write_string(out, name);
  write_u64(out, count);
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

void read_tensor(std::ifstream& in, const std::string& path,
                 const std::string& name, double* data, std::uint64_t count) {
  const std::string found = read_string(in);
  if (found != name)
    throw std::runtime_error("checkpoint tensor order mismatch in " + path +
                             ": expected " + name + ", found " + found);
  const std::uint64_t n = read_u64(in);
  if (n != count)
    throw std::runtime_error("checkpoint tensor size mismatch for " + name +
                             " in " + path);
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
}

}  // namespace detail

CheckpointInfo peek_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  return detail::read_header(in, path);
}

}  // namespace chorus::io
