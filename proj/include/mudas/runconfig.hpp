#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mudas/adapt.hpp"
#include "mudas/data.hpp"
#include "mudas/errors.hpp"
#include "mudas/nn.hpp"

namespace mudas {

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace cfg_detail {

inline double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* begin = value.c_str();
  const char* end = begin + value.size();
  auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ConfigError("config: key \"" + key + "\" needs a number, got \"" + value + "\"");
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* begin = value.c_str();
  const char* end = begin + value.size();
  auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc{} || res.ptr != end)
    throw ConfigError("config: key \"" + key + "\" needs a non-negative integer, got \"" + value + "\"");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: key \"" + key + "\" needs true/false, got \"" + value + "\"");
}

inline std::vector<std::size_t> parse_dim_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> dims;
  if (value.empty()) return dims;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    dims.push_back(static_cast<std::size_t>(parse_u64(key, item)));
  return dims;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace cfg_detail

/// Flat key=value run configuration. One pair per line, '#' starts a
/// comment, unknown keys are rejected. Command-line flags overlay file
/// values through set().
struct RunConfig {
  std::uint64_t seed = 7;

  // classifier
  std::size_t input_dim = 256;
  std::vector<std::size_t> hidden_dims = {128, 128};
  std::size_t num_classes = 0;  // 0 = take the class count from the labels file
  double dropout_rate = 0.2;

  // adaptation
  double tau_pos = 0.9;
  double tau_neg = 0.9;
  std::size_t batch_source = 64;
  std::size_t batch_target = 64;
  std::size_t epochs = 50;
  double lr_max = 0.001;
  double lr_min = 0.00025;
  std::string ramp_shape = "cosine";
  bool use_diversity = true;
  bool negate_diversity = false;
  double group_weight_source = 1.0;
  double group_weight_target = 1.0;
  double group_weight_diversity = 1.0;

  // synthetic benchmark
  std::size_t classes = 6;
  std::size_t dims = 256;
  std::uint64_t prototype_seed = 99;
  double label_prior = 0.3;
  double shift_rotation = 0.5;
  double shift_translation = 2.0;
  double noise_sigma = 0.3;
  std::size_t samples_source = 500;
  std::size_t samples_target = 500;

  void set(const std::string& key, const std::string& value) {
    using namespace cfg_detail;
    if (key == "seed") seed = parse_u64(key, value);
    else if (key == "input_dim") input_dim = parse_u64(key, value);
    else if (key == "hidden_dims") hidden_dims = parse_dim_list(key, value);
    else if (key == "num_classes") num_classes = parse_u64(key, value);
    else if (key == "dropout_rate") dropout_rate = parse_double(key, value);
    else if (key == "tau_pos") tau_pos = parse_double(key, value);
    else if (key == "tau_neg") tau_neg = parse_double(key, value);
    else if (key == "batch_source") batch_source = parse_u64(key, value);
    else if (key == "batch_target") batch_target = parse_u64(key, value);
    else if (key == "epochs") epochs = parse_u64(key, value);
    else if (key == "lr_max") lr_max = parse_double(key, value);
    else if (key == "lr_min") lr_min = parse_double(key, value);
    else if (key == "ramp_shape") ramp_shape = value;
    else if (key == "use_diversity") use_diversity = parse_bool(key, value);
    else if (key == "negate_diversity") negate_diversity = parse_bool(key, value);
    else if (key == "group_weight_source") group_weight_source = parse_double(key, value);
    else if (key == "group_weight_target") group_weight_target = parse_double(key, value);
    else if (key == "group_weight_diversity") group_weight_diversity = parse_double(key, value);
    else if (key == "classes") classes = parse_u64(key, value);
    else if (key == "dims") dims = parse_u64(key, value);
    else if (key == "prototype_seed") prototype_seed = parse_u64(key, value);
    else if (key == "label_prior") label_prior = parse_double(key, value);
    else if (key == "shift_rotation") shift_rotation = parse_double(key, value);
    else if (key == "shift_translation") shift_translation = parse_double(key, value);
    else if (key == "noise_sigma") noise_sigma = parse_double(key, value);
    else if (key == "samples_source") samples_source = parse_u64(key, value);
    else if (key == "samples_target") samples_target = parse_u64(key, value);
    else throw ConfigError("config: unknown key \"" + key + "\"");
  }

  void load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = cfg_detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config: line " + std::to_string(line_no) + " is not key=value");
      set(cfg_detail::trim(line.substr(0, eq)), cfg_detail::trim(line.substr(eq + 1)));
    }
  }

  /// Every key, alphabetically, one per line. Parseable back through
  /// load_file, so a logged config reproduces the run.
  std::string echo() const {
    std::map<std::string, std::string> kv;
    kv["seed"] = std::to_string(seed);
    kv["input_dim"] = std::to_string(input_dim);
    std::string dims_str;
    for (std::size_t i = 0; i < hidden_dims.size(); ++i)
      dims_str += (i ? "," : "") + std::to_string(hidden_dims[i]);
    kv["hidden_dims"] = dims_str;
    kv["num_classes"] = std::to_string(num_classes);
    kv["dropout_rate"] = format_double(dropout_rate);
    kv["tau_pos"] = format_double(tau_pos);
    kv["tau_neg"] = format_double(tau_neg);
    kv["batch_source"] = std::to_string(batch_source);
    kv["batch_target"] = std::to_string(batch_target);
    kv["epochs"] = std::to_string(epochs);
    kv["lr_max"] = format_double(lr_max);
    kv["lr_min"] = format_double(lr_min);
    kv["ramp_shape"] = ramp_shape;
    kv["use_diversity"] = use_diversity ? "true" : "false";
    kv["negate_diversity"] = negate_diversity ? "true" : "false";
    kv["group_weight_source"] = format_double(group_weight_source);
    kv["group_weight_target"] = format_double(group_weight_target);
    kv["group_weight_diversity"] = format_double(group_weight_diversity);
    kv["classes"] = std::to_string(classes);
    kv["dims"] = std::to_string(dims);
    kv["prototype_seed"] = std::to_string(prototype_seed);
    kv["label_prior"] = format_double(label_prior);
    kv["shift_rotation"] = format_double(shift_rotation);
    kv["shift_translation"] = format_double(shift_translation);
    kv["noise_sigma"] = format_double(noise_sigma);
    kv["samples_source"] = std::to_string(samples_source);
    kv["samples_target"] = std::to_string(samples_target);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
  }

  ClassifierConfig classifier_config(std::size_t label_classes) const {
    if (num_classes != 0 && label_classes != 0 && num_classes != label_classes)
      throw ConfigError("config: num_classes=" + std::to_string(num_classes) +
                        " disagrees with the labels file (" + std::to_string(label_classes) + ")");
    ClassifierConfig cfg;
    cfg.input_dim = input_dim;
    cfg.hidden_dims = hidden_dims;
    cfg.num_classes = num_classes ? num_classes : label_classes;
    cfg.dropout_rate = dropout_rate;
    cfg.seed = seed;
    return cfg;
  }

  AdaptConfig adapt_config() const {
    AdaptConfig cfg;
    cfg.tau_pos = tau_pos;
    cfg.tau_neg = tau_neg;
    cfg.batch_source = batch_source;
    cfg.batch_target = batch_target;
    cfg.epochs = epochs;
    cfg.lr_max = lr_max;
    cfg.lr_min = lr_min;
    if (ramp_shape == "cosine") cfg.ramp = RampShape::Cosine;
    else if (ramp_shape == "linear") cfg.ramp = RampShape::Linear;
    else throw ConfigError("config: ramp_shape must be cosine or linear");
    cfg.use_diversity = use_diversity;
    cfg.negate_diversity = negate_diversity;
    cfg.group_weight_source = group_weight_source;
    cfg.group_weight_target = group_weight_target;
    cfg.group_weight_diversity = group_weight_diversity;
    cfg.seed = seed;
    return cfg;
  }

  SyntheticSpec synthetic_spec() const {
    SyntheticSpec spec;
    spec.num_classes = classes;
    spec.dims = dims;
    spec.prototype_seed = prototype_seed;
    spec.label_prior = label_prior;
    spec.shift_rotation = shift_rotation;
    spec.shift_translation = shift_translation;
    spec.noise_sigma = noise_sigma;
    spec.samples_source = samples_source;
    spec.samples_target = samples_target;
    return spec;
  }
};

}  // namespace mudas
