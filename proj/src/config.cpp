// SPDX-License-Identifier: Apache-2.0
#include "movesort/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <set>
#include <sstream>

namespace movesort {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"tracker", {"t_lost", "init_hits", "iou_min", "lambda", "interp_max_gap", "min_track_len", "cost"}},
      {"filter", {"kind", "meas_noise_sigma", "buffer_size", "buffer_min"}},
      {"kalman", {"sigma_p", "sigma_v", "sigma_m"}},
      {"motion", {"arch", "hidden", "history_len", "ode_step", "leaky_slope", "features", "standardize"}},
      {"e2e", {"arch", "hidden", "history_len", "ode_step", "leaky_slope", "standardize"}},
      {"train",
       {"epochs", "lr", "weight_decay", "batch_size", "noise_probs", "noise_sigmas", "drop_prob",
        "shorten_prob", "seed", "max_horizon", "lr_period", "lr_gamma", "window_stride",
        "max_batches_per_epoch", "clip_norm", "augment"}},
      {"synthetic",
       {"kind", "n_objects", "n_frames", "speed", "amplitude", "period", "turn_prob", "turn_sigma",
        "crossing_frame", "crossing_dy", "crossing_weave", "crossing_scale", "scale_amplitude", "scale_period", "min_width", "max_width", "min_height", "max_height",
        "noise_sigma", "fn_prob", "seed"}},
      {"image", {"width", "height"}},
      {"bench", {"seeds", "fn_sigma", "noise_fn"}},
  };
  return keys;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config: bad number '" + item + "' in " + key);
    }
  }
  return out;
}

}  // namespace

Config::Config(pt::ptree tree) : tree_(std::move(tree)) { check_keys(); }

Config Config::load(const std::string& path) {
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return Config(std::move(tree));
}

Config Config::parse(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return Config(std::move(tree));
}

void Config::check_keys() const {
  const auto& keys = known_keys();
  for (const auto& [section, body] : tree_) {
    const auto it = keys.find(section);
    if (it == keys.end()) throw ConfigError("config: unknown section [" + section + "]");
    for (const auto& [key, _] : body) {
      if (!it->second.contains(key)) throw ConfigError("config: unknown key " + section + "." + key);
    }
  }
}

void Config::set(const std::string& key, const std::string& value) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("config: override needs section.key: " + key);
  const auto& keys = known_keys();
  const auto it = keys.find(key.substr(0, dot));
  if (it == keys.end() || !it->second.contains(key.substr(dot + 1))) {
    throw ConfigError("config: unknown key " + key);
  }
  tree_.put(key, value);
}

std::map<std::string, std::string> Config::flatten() const {
  std::map<std::string, std::string> out;
  for (const auto& [section, body] : tree_) {
    for (const auto& [key, value] : body) out[section + "." + key] = value.data();
  }
  return out;
}

template <class T>
T Config::get(const std::string& key, T fallback) const {
  const auto node = tree_.get_optional<std::string>(key);
  if (!node) return fallback;
  if constexpr (std::is_same_v<T, std::string>) {
    return *node;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (*node == "true" || *node == "1" || *node == "yes") return true;
    if (*node == "false" || *node == "0" || *node == "no") return false;
    throw ConfigError("config: " + key + " is not a boolean: " + *node);
  } else {
    const auto v = tree_.get_optional<T>(key);
    if (!v) throw ConfigError("config: " + key + " has an invalid value: " + *node);
    return *v;
  }
}

KalmanParams Config::kalman() const {
  KalmanParams p;
  p.sigma_p = get("kalman.sigma_p", p.sigma_p);
  p.sigma_v = get("kalman.sigma_v", p.sigma_v);
  p.sigma_m = get("kalman.sigma_m", p.sigma_m);
  return p;
}

double Config::meas_noise_sigma() const { return get("filter.meas_noise_sigma", 0.05); }

TrackerConfig Config::tracker() const {
  TrackerConfig c;
  c.t_lost = get("tracker.t_lost", c.t_lost);
  c.init_hits = get("tracker.init_hits", c.init_hits);
  c.iou_min = get("tracker.iou_min", c.iou_min);
  c.lambda = get("tracker.lambda", c.lambda);
  c.interp_max_gap = get("tracker.interp_max_gap", c.interp_max_gap);
  c.min_track_len = get("tracker.min_track_len", c.min_track_len);
  try {
    c.cost_mode = parse_cost_mode(get<std::string>("tracker.cost", "hybrid"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.filter = FilterKind::make_kalman(kalman());
  c.filter.buffer_size = get("filter.buffer_size", c.filter.buffer_size);
  c.filter.buffer_min = get("filter.buffer_min", c.filter.buffer_min);
  c.filter.meas_noise_sigma = meas_noise_sigma();
  return c;
}

TrainConfig Config::train(bool end_to_end) const {
  TrainConfig c = end_to_end ? TrainConfig::end_to_end_defaults() : TrainConfig{};
  c.epochs = get("train.epochs", c.epochs);
  c.lr = get("train.lr", c.lr);
  c.weight_decay = get("train.weight_decay", c.weight_decay);
  c.batch_size = get("train.batch_size", c.batch_size);
  c.drop_prob = get("train.drop_prob", c.drop_prob);
  c.shorten_prob = get("train.shorten_prob", c.shorten_prob);
  c.seed = get<std::uint64_t>("train.seed", c.seed);
  c.max_horizon = get("train.max_horizon", c.max_horizon);
  c.lr_period = get("train.lr_period", c.lr_period);
  c.lr_gamma = get("train.lr_gamma", c.lr_gamma);
  c.window_stride = get("train.window_stride", c.window_stride);
  c.max_batches_per_epoch = get("train.max_batches_per_epoch", c.max_batches_per_epoch);
  c.clip_norm = get("train.clip_norm", c.clip_norm);
  const auto probs = tree_.get_optional<std::string>("train.noise_probs");
  const auto sigmas = tree_.get_optional<std::string>("train.noise_sigmas");
  if (probs || sigmas) {
    std::vector<double> p = probs ? parse_list(*probs, "train.noise_probs") : std::vector<double>{};
    std::vector<double> s = sigmas ? parse_list(*sigmas, "train.noise_sigmas") : std::vector<double>{};
    if (!probs) {
      for (const auto& l : c.noise_schedule) p.push_back(l.probability);
    }
    if (!sigmas) {
      for (const auto& l : c.noise_schedule) s.push_back(l.sigma);
    }
    if (p.size() != s.size()) throw ConfigError("config: noise_probs and noise_sigmas differ in length");
    c.noise_schedule.clear();
    for (std::size_t i = 0; i < p.size(); ++i) c.noise_schedule.push_back({p[i], s[i]});
  }
  if (!get("train.augment", true)) c = c.without_augmentation();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

MotionModelConfig Config::motion() const {
  MotionModelConfig c;
  try {
    c.arch = parse_motion_arch(get<std::string>("motion.arch", std::string(to_string(c.arch))));
    c.mode = parse_feature_mode(get<std::string>("motion.features", std::string(to_string(c.mode))));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.hidden = get("motion.hidden", c.hidden);
  c.history_len = get("motion.history_len", c.history_len);
  c.ode_step = get("motion.ode_step", c.ode_step);
  c.leaky_slope = get("motion.leaky_slope", c.leaky_slope);
  c.standardize = get("motion.standardize", c.standardize);
  return c;
}

E2eModelConfig Config::e2e() const {
  E2eModelConfig c;
  try {
    c.arch = parse_e2e_arch(get<std::string>("e2e.arch", std::string(to_string(c.arch))));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.hidden = get("e2e.hidden", c.hidden);
  c.history_len = get("e2e.history_len", c.history_len);
  c.ode_step = get("e2e.ode_step", c.ode_step);
  c.leaky_slope = get("e2e.leaky_slope", c.leaky_slope);
  c.standardize = get("e2e.standardize", c.standardize);
  return c;
}

SyntheticSpec Config::synthetic() const {
  SyntheticSpec s;
  try {
    s.kind = parse_synthetic_kind(get<std::string>("synthetic.kind", std::string(to_string(s.kind))));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  s.n_objects = get("synthetic.n_objects", s.n_objects);
  s.n_frames = get("synthetic.n_frames", s.n_frames);
  s.speed = get("synthetic.speed", s.speed);
  s.amplitude = get("synthetic.amplitude", s.amplitude);
  s.period = get("synthetic.period", s.period);
  s.turn_prob = get("synthetic.turn_prob", s.turn_prob);
  s.turn_sigma = get("synthetic.turn_sigma", s.turn_sigma);
  s.crossing_frame = get("synthetic.crossing_frame", s.crossing_frame);
  s.crossing_dy = get("synthetic.crossing_dy", s.crossing_dy);
  s.crossing_weave = get("synthetic.crossing_weave", s.crossing_weave);
  s.crossing_scale = get("synthetic.crossing_scale", s.crossing_scale);
  s.scale_amplitude = get("synthetic.scale_amplitude", s.scale_amplitude);
  s.scale_period = get("synthetic.scale_period", s.scale_period);
  s.min_width = get("synthetic.min_width", s.min_width);
  s.max_width = get("synthetic.max_width", s.max_width);
  s.min_height = get("synthetic.min_height", s.min_height);
  s.max_height = get("synthetic.max_height", s.max_height);
  s.noise_sigma = get("synthetic.noise_sigma", s.noise_sigma);
  s.fn_prob = get("synthetic.fn_prob", s.fn_prob);
  s.seed = get<std::uint64_t>("synthetic.seed", s.seed);
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return s;
}

ImageSize Config::image() const {
  ImageSize s;
  s.width = get("image.width", s.width);
  s.height = get("image.height", s.height);
  if (!(s.width > 0.0 && s.height > 0.0)) throw ConfigError("config: image size must be positive");
  return s;
}

std::string Config::filter_kind() const {
  const std::string kind = get<std::string>("filter.kind", "kalman");
  try {
    parse_filter_family(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return kind;
}

BenchDefaults Config::bench() const {
  BenchDefaults b;
  b.seeds = get("bench.seeds", b.seeds);
  b.noise_fn = get("bench.noise_fn", b.noise_fn);
  b.fn_sigma = get("bench.fn_sigma", b.fn_sigma);
  if (b.seeds < 1) throw ConfigError("config: bench.seeds must be positive");
  if (b.noise_fn < 0.0 || b.noise_fn > 1.0) throw ConfigError("config: bench.noise_fn must lie in [0, 1]");
  if (b.fn_sigma < 0.0) throw ConfigError("config: bench.fn_sigma must be nonnegative");
  return b;
}

}  // namespace movesort
