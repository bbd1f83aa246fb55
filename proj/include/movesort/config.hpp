// SPDX-License-Identifier: Apache-2.0
/**
 * @file   config.hpp
 * @brief  INI experiment configuration. The grammar and every recognized key
 *         are listed in docs/config_format.md.
 */
#pragma once

#include <map>
#include <string>

#include <boost/property_tree/ptree.hpp>

#include "movesort/e2e.hpp"
#include "movesort/io.hpp"
#include "movesort/kalman.hpp"
#include "movesort/motion.hpp"
#include "movesort/synthetic.hpp"
#include "movesort/tracker.hpp"

namespace movesort {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Defaults for the bench-noise and bench-fn commands.
struct BenchDefaults {
  int seeds = 20;
  double noise_fn = 0.0;  ///< miss rate held fixed by bench-noise
  double fn_sigma = 0.0;  ///< noise sigma held fixed by bench-fn
};

class Config {
 public:
  Config() = default;
  explicit Config(boost::property_tree::ptree tree);

  /// Throws ConfigError on unreadable files, syntax errors or unknown keys.
  static Config load(const std::string& path);
  static Config parse(const std::string& text);

  /// Overrides one "section.key" entry.
  void set(const std::string& key, const std::string& value);
  /// "section.key" -> raw value, sorted.
  std::map<std::string, std::string> flatten() const;

  /// Each reader starts from the built-in defaults and applies the matching
  /// section. Throws ConfigError on values that do not parse.
  TrackerConfig tracker() const;
  KalmanParams kalman() const;
  TrainConfig train(bool end_to_end) const;
  MotionModelConfig motion() const;
  E2eModelConfig e2e() const;
  SyntheticSpec synthetic() const;
  ImageSize image() const;
  BenchDefaults bench() const;
  /// filter.kind, "kalman" when absent.
  std::string filter_kind() const;
  double meas_noise_sigma() const;

 private:
  void check_keys() const;
  template <class T>
  T get(const std::string& key, T fallback) const;

  boost::property_tree::ptree tree_;
};

}  // namespace movesort
