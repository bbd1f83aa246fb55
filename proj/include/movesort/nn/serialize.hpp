// SPDX-License-Identifier: Apache-2.0
/**
 * @file   serialize.hpp
 * @brief  Model container: kind tag, settings, layer list, feature codec and
 *         named parameter arrays. Byte layout is documented in
 *         docs/model_format.md; every number is little-endian.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "movesort/features.hpp"
#include "movesort/nn/layers.hpp"
#include "movesort/nn/param_store.hpp"

namespace movesort::nn {

inline constexpr char kModelMagic[4] = {'M', 'V', 'S', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelFile {
  std::string kind;
  std::vector<std::pair<std::string, double>> settings;
  std::vector<LayerSpec> layers;
  FeatureCodec codec;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  ParamStore params;

  /// Throws FormatError when the key is absent.
  double setting(const std::string& key) const;
};

void write_params(std::ostream& os, const ParamStore& ps);
ParamStore read_params(std::istream& is);

void write_model(std::ostream& os, const ModelFile& m);
/// Throws FormatError on bad magic, unsupported version or truncation.
ModelFile read_model(std::istream& is);

void save_model(const std::string& path, const ModelFile& m);
ModelFile load_model(const std::string& path);

}  // namespace movesort::nn
