#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mudas/data.hpp"
#include "mudas/errors.hpp"
#include "mudas/nn.hpp"
#include "mudas/select.hpp"

namespace mudas {

/// Source-model statistics carried inside a saved model so selection can
/// run without re-touching the source set: per-class probability ranges
/// and label-frequency weights.
struct SourceStatsBlock {
  SourceRangeStats ranges;
  ClassWeights weights;
};

struct LoadedModel {
  ParameterSet params;
  std::optional<SourceStatsBlock> stats;
};

// MUD1 layout, little-endian:
//   magic "MUD1", u32 version,
//   u32 input_dim, u32 hidden count, u32[] hidden dims, u32 classes, f32 dropout,
//   per dense layer: weight (row-major f32), bias (f32),
//   per BN layer: gamma, beta, running mean, running variance (all f32),
//   u8 stats flag, then if set: f32 max[k], min[k], weight[k].
// Adam state is not persisted; a loaded model starts with fresh moments.

namespace detail {

inline void write_f32_array(std::ostream& os, const std::vector<double>& v) {
  for (double x : v) write_f32(os, static_cast<float>(x));
}

inline void read_f32_array(std::istream& is, std::vector<double>& v, const char* what) {
  for (auto& x : v) x = static_cast<double>(read_f32(is, what));
}

}  // namespace detail

inline void save_model(const std::string& path, const ParameterSet& params,
                       const SourceStatsBlock* stats = nullptr) {
  auto os = detail::open_out(path);
  os.write("MUD1", 4);
  detail::write_u32(os, 1);
  detail::write_u32(os, static_cast<std::uint32_t>(params.config.input_dim));
  detail::write_u32(os, static_cast<std::uint32_t>(params.config.hidden_dims.size()));
  for (std::size_t h : params.config.hidden_dims)
    detail::write_u32(os, static_cast<std::uint32_t>(h));
  detail::write_u32(os, static_cast<std::uint32_t>(params.config.num_classes));
  detail::write_f32(os, static_cast<float>(params.config.dropout_rate));

  for (const auto& d : params.dense) {
    detail::write_f32_array(os, d.weight.values());
    detail::write_f32_array(os, d.bias);
  }
  for (const auto& b : params.norm) {
    detail::write_f32_array(os, b.gamma);
    detail::write_f32_array(os, b.beta);
    detail::write_f32_array(os, b.running_mean);
    detail::write_f32_array(os, b.running_var);
  }

  const std::uint8_t flag = stats ? 1 : 0;
  detail::write_bytes(os, &flag, 1);
  if (stats) {
    if (stats->ranges.classes() != params.config.num_classes ||
        stats->weights.w.size() != params.config.num_classes)
      throw ShapeError("save_model: stats block class count mismatch");
    detail::write_f32_array(os, stats->ranges.max_ws);
    detail::write_f32_array(os, stats->ranges.min_ws);
    detail::write_f32_array(os, stats->weights.w);
  }
  if (!os) throw Error("write failed: " + path);
}

inline LoadedModel load_model(const std::string& path) {
  auto is = detail::open_in(path);
  detail::expect_magic(is, "MUD1", "model file");
  const std::uint32_t version = detail::read_u32(is, "MUD1 version");
  if (version != 1) throw FormatError("MUD1: unsupported version");

  ClassifierConfig cfg;
  cfg.input_dim = detail::read_u32(is, "MUD1 input_dim");
  const std::uint32_t n_hidden = detail::read_u32(is, "MUD1 hidden count");
  cfg.hidden_dims.resize(n_hidden);
  for (auto& h : cfg.hidden_dims) h = detail::read_u32(is, "MUD1 hidden dim");
  cfg.num_classes = detail::read_u32(is, "MUD1 class count");
  cfg.dropout_rate = static_cast<double>(detail::read_f32(is, "MUD1 dropout"));
  cfg.validate();

  LoadedModel model;
  model.params = init_parameters(cfg);
  for (auto& d : model.params.dense) {
    detail::read_f32_array(is, d.weight.values(), "MUD1 weights");
    detail::read_f32_array(is, d.bias, "MUD1 biases");
  }
  for (auto& b : model.params.norm) {
    detail::read_f32_array(is, b.gamma, "MUD1 bn gamma");
    detail::read_f32_array(is, b.beta, "MUD1 bn beta");
    detail::read_f32_array(is, b.running_mean, "MUD1 bn mean");
    detail::read_f32_array(is, b.running_var, "MUD1 bn variance");
    for (double v : b.running_var)
      if (!(v > 0.0)) throw FormatError("MUD1: running variance must be positive");
  }

  std::uint8_t flag = 0;
  detail::read_bytes(is, &flag, 1, "MUD1 stats flag");
  if (flag == 1) {
    SourceStatsBlock stats;
    stats.ranges.max_ws.resize(cfg.num_classes);
    stats.ranges.min_ws.resize(cfg.num_classes);
    stats.weights.w.resize(cfg.num_classes);
    detail::read_f32_array(is, stats.ranges.max_ws, "MUD1 stats max");
    detail::read_f32_array(is, stats.ranges.min_ws, "MUD1 stats min");
    detail::read_f32_array(is, stats.weights.w, "MUD1 stats weights");
    model.stats = std::move(stats);
  } else if (flag != 0) {
    throw FormatError("MUD1: invalid stats flag");
  }
  char extra;
  if (is.read(&extra, 1)) throw FormatError("MUD1: trailing bytes after payload");
  return model;
}

}  // namespace mudas
