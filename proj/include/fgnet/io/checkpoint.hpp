// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0
//
// Versioned binary checkpoint container: magic "FGN1", little-endian,
// a config echo, then shape-prefixed named parameter blobs.

#ifndef FGNET_IO_CHECKPOINT_HPP
#define FGNET_IO_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgnet/ad/tensor.hpp"

namespace fgnet {

namespace detail {

inline void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(out, bits);
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

inline std::uint64_t read_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

inline double read_f64(std::istream& in) {
  const std::uint64_t bits = read_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace detail

struct Checkpoint {
  std::string config_text;
  std::vector<std::string> names;
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<std::vector<double>> values;

  const std::vector<double>* find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return &values[i];
    return nullptr;
  }
};

inline void save_checkpoint(const std::string& path, const std::string& config_text,
                            const std::vector<ad::Tensor>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write("FGN1", 4);
  detail::write_u32(out, 1);  // format version
  detail::write_u64(out, config_text.size());
  out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
  detail::write_u64(out, params.size());
  for (const auto& p : params) {
    const std::string& name = p.name();
    detail::write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_u32(out, static_cast<std::uint32_t>(p.rows()));
    detail::write_u32(out, static_cast<std::uint32_t>(p.cols()));
    for (const double v : p.values()) detail::write_f64(out, v);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "FGN1", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const std::uint32_t version = detail::read_u32(in);
  if (version != 1)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint ck;
  const std::uint64_t cfg_len = detail::read_u64(in);
  ck.config_text.resize(cfg_len);
  in.read(ck.config_text.data(), static_cast<std::streamsize>(cfg_len));
  const std::uint64_t count = detail::read_u64(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = detail::read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const int rows = static_cast<int>(detail::read_u32(in));
    const int cols = static_cast<int>(detail::read_u32(in));
    std::vector<double> vals(static_cast<std::size_t>(rows) * cols);
    for (auto& v : vals) v = detail::read_f64(in);
    if (!in) throw std::runtime_error("checkpoint: truncated parameter " + name);
    ck.names.push_back(std::move(name));
    ck.rows.push_back(rows);
    ck.cols.push_back(cols);
    ck.values.push_back(std::move(vals));
  }
  return ck;
}

/// Copy stored values into live parameters, matching by name and shape.
inline void restore_parameters(const Checkpoint& ck, std::vector<ad::Tensor>& params) {
  for (auto& p : params) {
    const auto* vals = ck.find(p.name());
    if (!vals) throw std::runtime_error("checkpoint: missing parameter " + p.name());
    if (vals->size() != p.count())
      throw std::runtime_error("checkpoint: shape mismatch for " + p.name());
    p.mutable_values() = *vals;
  }
}

}  // namespace fgnet

#endif  // FGNET_IO_CHECKPOINT_HPP
