// Copyright (c) 2026 fgnet contributors
// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value configuration files. Lines are `key = value`; '#' starts
// a comment. Unknown keys are rejected so typos fail fast.

#ifndef FGNET_IO_CONFIG_HPP
#define FGNET_IO_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fgnet/filter/outlier_filter.hpp"
#include "fgnet/net/network.hpp"
#include "fgnet/train/adam.hpp"

namespace fgnet {

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

inline KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  return parse_key_values(in);
}

namespace detail {

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(std::stod(t));
  }
  return out;
}

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

inline bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "on" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "off" || s == "no") return false;
  throw std::invalid_argument("config: bad boolean '" + s + "'");
}

}  // namespace detail

struct TrainConfig {
  AdamConfig adam;
  int epochs = 200;
  std::uint64_t seed = 0;
  double tau_start = 1.0;
  double tau_end = 0.05;
  bool augment = false;
  bool filter = false;
  FilterParams filter_params;
  int checkpoint_every = 25;
  std::size_t batch_points = 16384;

  /// Exponential anneal, monotone non-increasing from tau_start to tau_end.
  double tau_at(int epoch) const {
    if (epochs <= 1) return tau_end;
    const double t = static_cast<double>(epoch) / (epochs - 1);
    return tau_start * std::pow(tau_end / tau_start, t);
  }
};

/// Apply one key to either config. Returns false on an unknown key.
inline bool apply_config_key(NetworkConfig& net, TrainConfig& train, const std::string& key,
                             const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double_list;
  using detail::parse_int_list;
  if (key == "net.stages") net.stages = std::stoi(value);
  else if (key == "net.bottleneck") net.bottleneck = std::stoi(value);
  else if (key == "net.widths") net.widths = parse_int_list(value);
  else if (key == "net.radii") net.radii = parse_double_list(value);
  else if (key == "net.neighbor_cap") net.neighbor_cap = std::stoi(value);
  else if (key == "net.classes") net.class_count = std::stoi(value);
  else if (key == "net.presence_classes") net.presence_classes = std::stoi(value);
  else if (key == "net.alpha") net.alpha = parse_double_list(value);
  else if (key == "net.beta") net.beta = std::stod(value);
  else if (key == "net.rlb_per_stage") net.rlb_per_stage = std::stoi(value);
  else if (key == "net.kernel_points") net.kernel_points = std::stoi(value);
  else if (key == "net.input_features") net.input_features = std::stoi(value);
  else if (key == "net.schedule") {
    net.schedule.clear();
    for (const int v : parse_int_list(value)) net.schedule.push_back(v);
  } else if (key == "net.use_pfm") net.use_pfm = parse_bool(value);
  else if (key == "net.use_gcm") net.use_gcm = parse_bool(value);
  else if (key == "net.use_ag") net.use_ag = parse_bool(value);
  else if (key == "net.use_global") net.use_global = parse_bool(value);
  else if (key == "net.use_gss") net.use_gss = parse_bool(value);
  else if (key == "net.use_context_loss") net.use_context_loss = parse_bool(value);
  else if (key == "net.freeze_deform") net.freeze_deform = parse_bool(value);
  else if (key == "net.rowwise_softmax") net.rowwise_softmax = parse_bool(value);
  else if (key == "net.seed") net.seed = std::stoull(value);
  else if (key == "train.learning_rate") train.adam.learning_rate = std::stod(value);
  else if (key == "train.beta1") train.adam.beta1 = std::stod(value);
  else if (key == "train.beta2") train.adam.beta2 = std::stod(value);
  else if (key == "train.epsilon") train.adam.epsilon = std::stod(value);
  else if (key == "train.epochs") train.epochs = std::stoi(value);
  else if (key == "train.seed") train.seed = std::stoull(value);
  else if (key == "train.tau_start") train.tau_start = std::stod(value);
  else if (key == "train.tau_end") train.tau_end = std::stod(value);
  else if (key == "train.augment") train.augment = parse_bool(value);
  else if (key == "train.filter") train.filter = parse_bool(value);
  else if (key == "train.filter_radius") train.filter_params.radius = std::stod(value);
  else if (key == "train.filter_min_neighbors") train.filter_params.min_neighbors = std::stoi(value);
  else if (key == "train.filter_sigma_mult") train.filter_params.sigma_multiplier = std::stod(value);
  else if (key == "train.checkpoint_every") train.checkpoint_every = std::stoi(value);
  else if (key == "train.batch_points") train.batch_points = std::stoull(value);
  else return false;
  return true;
}

inline void apply_config(NetworkConfig& net, TrainConfig& train, const KeyValues& kv) {
  for (const auto& [key, value] : kv)
    if (!apply_config_key(net, train, key, value))
      throw std::invalid_argument("config: unknown key '" + key + "'");
}

/// Echo of the effective settings, suitable for re-parsing.
inline std::string serialize_config(const NetworkConfig& net, const TrainConfig& train) {
  std::ostringstream os;
  os << "net.stages = " << net.stages << "\n";
  os << "net.bottleneck = " << net.bottleneck << "\n";
  os << "net.widths = ";
  for (std::size_t i = 0; i < net.widths.size(); ++i)
    os << (i ? "," : "") << net.widths[i];
  os << "\n";
  if (!net.radii.empty()) {
    os << "net.radii = ";
    for (std::size_t i = 0; i < net.radii.size(); ++i) os << (i ? "," : "") << net.radii[i];
    os << "\n";
  }
  os << "net.neighbor_cap = " << net.neighbor_cap << "\n";
  os << "net.classes = " << net.class_count << "\n";
  os << "net.presence_classes = " << net.presence_classes << "\n";
  os << "net.alpha = ";
  for (std::size_t i = 0; i < net.alpha.size(); ++i) os << (i ? "," : "") << net.alpha[i];
  os << "\n";
  os << "net.beta = " << net.beta << "\n";
  os << "net.rlb_per_stage = " << net.rlb_per_stage << "\n";
  os << "net.kernel_points = " << net.kernel_points << "\n";
  os << "net.input_features = " << net.input_features << "\n";
  if (!net.schedule.empty()) {
    os << "net.schedule = ";
    for (std::size_t i = 0; i < net.schedule.size(); ++i) os << (i ? "," : "") << net.schedule[i];
    os << "\n";
  }
  os << "net.use_pfm = " << (net.use_pfm ? 1 : 0) << "\n";
  os << "net.use_gcm = " << (net.use_gcm ? 1 : 0) << "\n";
  os << "net.use_ag = " << (net.use_ag ? 1 : 0) << "\n";
  os << "net.use_global = " << (net.use_global ? 1 : 0) << "\n";
  os << "net.use_gss = " << (net.use_gss ? 1 : 0) << "\n";
  os << "net.use_context_loss = " << (net.use_context_loss ? 1 : 0) << "\n";
  os << "net.freeze_deform = " << (net.freeze_deform ? 1 : 0) << "\n";
  os << "net.rowwise_softmax = " << (net.rowwise_softmax ? 1 : 0) << "\n";
  os << "net.seed = " << net.seed << "\n";
  os << "train.learning_rate = " << train.adam.learning_rate << "\n";
  os << "train.beta1 = " << train.adam.beta1 << "\n";
  os << "train.beta2 = " << train.adam.beta2 << "\n";
  os << "train.epsilon = " << train.adam.epsilon << "\n";
  os << "train.epochs = " << train.epochs << "\n";
  os << "train.seed = " << train.seed << "\n";
  os << "train.tau_start = " << train.tau_start << "\n";
  os << "train.tau_end = " << train.tau_end << "\n";
  os << "train.augment = " << (train.augment ? 1 : 0) << "\n";
  os << "train.filter = " << (train.filter ? 1 : 0) << "\n";
  os << "train.filter_radius = " << train.filter_params.radius << "\n";
  os << "train.filter_min_neighbors = " << train.filter_params.min_neighbors << "\n";
  os << "train.filter_sigma_mult = " << train.filter_params.sigma_multiplier << "\n";
  os << "train.checkpoint_every = " << train.checkpoint_every << "\n";
  os << "train.batch_points = " << train.batch_points << "\n";
  return os.str();
}

}  // namespace fgnet

#endif  // FGNET_IO_CONFIG_HPP
