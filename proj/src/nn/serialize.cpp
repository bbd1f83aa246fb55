// SPDX-License-Identifier: Apache-2.0
#include "movesort/nn/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace movesort::nn {

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  os.write(b, 8);
}

void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  os.write(b, 4);
}

void put_u8(std::ostream& os, std::uint8_t v) { os.put(static_cast<char>(v)); }
void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void need(std::istream& is, const char* what) {
  if (!is) throw FormatError(std::string("model file truncated while reading ") + what);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  need(is, "u64");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  need(is, "u32");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint8_t get_u8(std::istream& is) {
  const int c = is.get();
  need(is, "u8");
  return static_cast<std::uint8_t>(c);
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

std::string get_str(std::istream& is) {
  const std::uint32_t n = get_u32(is);
  if (n > (1U << 20)) throw FormatError("model file: string too long");
  std::string s(n, '\0');
  is.read(s.data(), n);
  need(is, "string");
  return s;
}

}  // namespace

double ModelFile::setting(const std::string& key) const {
  for (const auto& [k, v] : settings) {
    if (k == key) return v;
  }
  throw FormatError("model file: missing setting " + key);
}

void write_params(std::ostream& os, const ParamStore& ps) {
  put_u32(os, static_cast<std::uint32_t>(ps.size()));
  for (const auto& p : ps) {
    put_str(os, p.name);
    put_u32(os, static_cast<std::uint32_t>(p.value.rows()));
    put_u32(os, static_cast<std::uint32_t>(p.value.cols()));
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) {
      for (Eigen::Index j = 0; j < p.value.cols(); ++j) put_f64(os, p.value(i, j));
    }
  }
}

ParamStore read_params(std::istream& is) {
  ParamStore ps;
  const std::uint32_t count = get_u32(is);
  for (std::uint32_t k = 0; k < count; ++k) {
    std::string name = get_str(is);
    const std::uint32_t rows = get_u32(is);
    const std::uint32_t cols = get_u32(is);
    if (static_cast<std::uint64_t>(rows) * cols > (1ULL << 26)) {
      throw FormatError("model file: parameter " + name + " too large");
    }
    Matrix m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = get_f64(is);
    }
    ps.add(std::move(name), std::move(m));
  }
  return ps;
}

void write_model(std::ostream& os, const ModelFile& m) {
  os.write(kModelMagic, 4);
  put_u32(os, kModelVersion);
  put_str(os, m.kind);
  put_u32(os, static_cast<std::uint32_t>(m.settings.size()));
  for (const auto& [k, v] : m.settings) {
    put_str(os, k);
    put_f64(os, v);
  }
  put_u32(os, static_cast<std::uint32_t>(m.layers.size()));
  for (const auto& l : m.layers) {
    put_u8(os, static_cast<std::uint8_t>(l.kind));
    put_u32(os, static_cast<std::uint32_t>(l.in));
    put_u32(os, static_cast<std::uint32_t>(l.out));
  }
  put_u8(os, static_cast<std::uint8_t>(m.codec.mode));
  put_u8(os, m.codec.standardize ? 1 : 0);
  for (int i = 0; i < 5; ++i) put_f64(os, m.codec.mean[i]);
  for (int i = 0; i < 5; ++i) put_f64(os, m.codec.std[i]);
  put_u64(os, m.seed);
  put_f64(os, m.final_loss);
  write_params(os, m.params);
}

ModelFile read_model(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  need(is, "magic");
  if (std::memcmp(magic, kModelMagic, 4) != 0) throw FormatError("model file: bad magic");
  const std::uint32_t version = get_u32(is);
  if (version != kModelVersion) {
    throw FormatError("model file: unsupported version " + std::to_string(version));
  }
  ModelFile m;
  m.kind = get_str(is);
  const std::uint32_t n_settings = get_u32(is);
  for (std::uint32_t i = 0; i < n_settings; ++i) {
    std::string key = get_str(is);
    m.settings.emplace_back(std::move(key), get_f64(is));
  }
  const std::uint32_t n_layers = get_u32(is);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto kind = get_u8(is);
    if (kind > static_cast<std::uint8_t>(LayerKind::kGruCell)) {
      throw FormatError("model file: unknown layer kind");
    }
    LayerSpec spec{static_cast<LayerKind>(kind), 0, 0};
    spec.in = static_cast<int>(get_u32(is));
    spec.out = static_cast<int>(get_u32(is));
    m.layers.push_back(spec);
  }
  const auto mode = get_u8(is);
  if (mode > static_cast<std::uint8_t>(FeatureMode::kRelativeToFirst)) {
    throw FormatError("model file: unknown feature mode");
  }
  m.codec.mode = static_cast<FeatureMode>(mode);
  m.codec.standardize = get_u8(is) != 0;
  for (int i = 0; i < 5; ++i) m.codec.mean[i] = get_f64(is);
  for (int i = 0; i < 5; ++i) m.codec.std[i] = get_f64(is);
  m.seed = get_u64(is);
  m.final_loss = get_f64(is);
  m.params = read_params(is);
  return m;
}

void save_model(const std::string& path, const ModelFile& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_model(os, m);
  if (!os) throw std::runtime_error("failed writing " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open model file " + path);
  return read_model(is);
}

}  // namespace movesort::nn
