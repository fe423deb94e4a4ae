#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mudas/embed.hpp"
#include "mudas/errors.hpp"
#include "mudas/matrix.hpp"
#include "mudas/rng.hpp"

namespace mudas {

/// MLP architecture: input -> (dense, batch norm, ReLU, dropout) per
/// hidden layer -> dense -> sigmoid per class.
struct ClassifierConfig {
  std::size_t input_dim = 256;
  std::vector<std::size_t> hidden_dims = {128, 128};
  std::size_t num_classes = 1;
  double dropout_rate = 0.2;
  std::uint64_t seed = 0;

  void validate() const {
    if (input_dim == 0) throw ConfigError("ClassifierConfig: input_dim must be >= 1");
    for (std::size_t h : hidden_dims)
      if (h == 0) throw ConfigError("ClassifierConfig: hidden dims must be >= 1");
    if (num_classes == 0) throw ConfigError("ClassifierConfig: num_classes must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
      throw ConfigError("ClassifierConfig: dropout_rate outside [0, 1)");
  }
};

/// Batch-norm behavior for one forward pass.
///  - UpdateStats: normalize with batch statistics and fold them into the
///    running averages (momentum 0.9). Dropout active.
///  - FrozenStats: normalize with the current running statistics, leave
///    them untouched. Dropout active.
///  - Inference: FrozenStats plus dropout disabled.
enum class BnMode { UpdateStats, FrozenStats, Inference };

struct DenseParams {
  MatD weight;               // out x in
  std::vector<double> bias;  // out
};

struct BnParams {
  std::vector<double> gamma, beta;
  std::vector<double> running_mean, running_var;
};

struct AdamState {
  // first/second moments, aligned with the trainable-tensor enumeration
  std::vector<std::vector<double>> m, v;
  std::uint64_t steps = 0;
};

struct ParameterSet {
  ClassifierConfig config;
  std::vector<DenseParams> dense;  // hidden layers then the output layer
  std::vector<BnParams> norm;      // one per hidden layer
  AdamState adam;
};

struct Gradients {
  struct BnGrad {
    std::vector<double> gamma, beta;
  };
  std::vector<DenseParams> dense;
  std::vector<BnGrad> norm;

  void add(const Gradients& o) {
    for (std::size_t l = 0; l < dense.size(); ++l) {
      auto& w = dense[l].weight.values();
      const auto& ow = o.dense[l].weight.values();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += ow[i];
      for (std::size_t i = 0; i < dense[l].bias.size(); ++i) dense[l].bias[i] += o.dense[l].bias[i];
    }
    for (std::size_t l = 0; l < norm.size(); ++l) {
      for (std::size_t i = 0; i < norm[l].gamma.size(); ++i) norm[l].gamma[i] += o.norm[l].gamma[i];
      for (std::size_t i = 0; i < norm[l].beta.size(); ++i) norm[l].beta[i] += o.norm[l].beta[i];
    }
  }
};

/// Cached intermediates of one forward pass; enough to backpropagate and
/// to replay the pass bit-for-bit (dropout masks and BN statistics are
/// stored, not redrawn).
struct ForwardTrace {
  BnMode mode = BnMode::Inference;
  MatD input;
  struct Layer {
    MatD pre_bn;               // dense output
    std::vector<double> mu, var;  // statistics used by the pass
    MatD xhat;                 // normalized pre-activation
    MatD bn_out;               // gamma * xhat + beta
    MatD dropout_mask;         // scale per cell (0 or 1/(1-p)); empty if inactive
    MatD out;                  // layer output fed to the next dense layer
  };
  std::vector<Layer> layers;
  MatD logits;
  MatD probs;
};

struct ForwardResult {
  MatD probs;
  ForwardTrace trace;
};

namespace nn_detail {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.9;
constexpr double kProbLo = 1e-15;
constexpr double kProbHi = 1.0 - 1e-15;

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline MatD affine(const MatD& in, const DenseParams& p) {
  const std::size_t rows = in.rows(), out_dim = p.weight.rows(), in_dim = p.weight.cols();
  if (in.cols() != in_dim) throw ShapeError("forward: input width does not match layer");
  MatD out(rows, out_dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.row(r);
    double* y = out.row(r);
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* w = p.weight.row(o);
      double acc = p.bias[o];
      for (std::size_t i = 0; i < in_dim; ++i) acc += w[i] * x[i];
      y[o] = acc;
    }
  }
  return out;
}

/// Core forward pass. `running_update` points at the BN layers to fold
/// batch statistics into (UpdateStats only); `replay` provides recorded
/// dropout masks instead of drawing fresh ones.
inline MatD run_forward(const ParameterSet& params, const MatD& input, BnMode mode, Rng* rng,
                        std::vector<BnParams>* running_update, const ForwardTrace* replay,
                        ForwardTrace* trace_out) {
  if (input.rows() == 0) throw ShapeError("forward: empty batch");
  if (input.cols() != params.config.input_dim)
    throw ShapeError("forward: batch width " + std::to_string(input.cols()) +
                     " does not match input_dim " + std::to_string(params.config.input_dim));

  const std::size_t n_hidden = params.config.hidden_dims.size();
  const std::size_t rows = input.rows();
  const double p_drop = params.config.dropout_rate;
  const bool dropout_active = p_drop > 0.0 && mode != BnMode::Inference;

  if (trace_out) {
    trace_out->mode = mode;
    trace_out->input = input;
    trace_out->layers.assign(n_hidden, {});
  }

  MatD act = input;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    MatD pre = affine(act, params.dense[l]);
    const std::size_t width = pre.cols();
    const BnParams& bn = params.norm[l];

    std::vector<double> mu(width), var(width);
    if (mode == BnMode::UpdateStats) {
      for (std::size_t j = 0; j < width; ++j) {
        double sum = 0.0;
        for (std::size_t r = 0; r < rows; ++r) sum += pre(r, j);
        mu[j] = sum / static_cast<double>(rows);
        double sq = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
          const double d = pre(r, j) - mu[j];
          sq += d * d;
        }
        var[j] = sq / static_cast<double>(rows);
      }
      if (running_update) {
        BnParams& target = (*running_update)[l];
        for (std::size_t j = 0; j < width; ++j) {
          target.running_mean[j] = kBnMomentum * target.running_mean[j] + (1.0 - kBnMomentum) * mu[j];
          target.running_var[j] = kBnMomentum * target.running_var[j] + (1.0 - kBnMomentum) * var[j];
        }
      }
    } else {
      mu = bn.running_mean;
      var = bn.running_var;
    }

    MatD xhat(rows, width), bn_out(rows, width);
    for (std::size_t j = 0; j < width; ++j) {
      const double inv_std = 1.0 / std::sqrt(var[j] + kBnEps);
      for (std::size_t r = 0; r < rows; ++r) {
        const double xh = (pre(r, j) - mu[j]) * inv_std;
        xhat(r, j) = xh;
        bn_out(r, j) = bn.gamma[j] * xh + bn.beta[j];
      }
    }

    MatD mask;
    if (dropout_active) {
      if (replay) {
        mask = replay->layers[l].dropout_mask;
      } else {
        mask = MatD(rows, width);
        const double keep_scale = 1.0 / (1.0 - p_drop);
        for (std::size_t i = 0; i < mask.size(); ++i)
          mask.values()[i] = rng->uniform01() < p_drop ? 0.0 : keep_scale;
      }
    }

    MatD out(rows, width);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double relu = bn_out.values()[i] > 0.0 ? bn_out.values()[i] : 0.0;
      out.values()[i] = dropout_active ? relu * mask.values()[i] : relu;
    }

    if (trace_out) {
      ForwardTrace::Layer& t = trace_out->layers[l];
      t.pre_bn = std::move(pre);
      t.mu = std::move(mu);
      t.var = std::move(var);
      t.xhat = std::move(xhat);
      t.bn_out = std::move(bn_out);
      t.dropout_mask = mask;
      t.out = out;
    }
    act = std::move(out);
  }

  MatD logits = affine(act, params.dense[n_hidden]);
  MatD probs(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    double p = sigmoid(logits.values()[i]);
    if (p < kProbLo) p = kProbLo;
    if (p > kProbHi) p = kProbHi;
    probs.values()[i] = p;
  }
  if (trace_out) {
    trace_out->logits = std::move(logits);
    trace_out->probs = probs;
  }
  return probs;
}

}  // namespace nn_detail

/// Glorot-uniform weights, zero biases, unit BN scale, fresh Adam state.
inline ParameterSet init_parameters(const ClassifierConfig& config) {
  config.validate();
  ParameterSet params;
  params.config = config;
  Rng rng(config.seed);

  std::vector<std::size_t> dims;
  dims.push_back(config.input_dim);
  dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  dims.push_back(config.num_classes);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
    DenseParams dp;
    dp.weight = MatD(fan_out, fan_in);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& w : dp.weight.values()) w = rng.uniform(-limit, limit);
    dp.bias.assign(fan_out, 0.0);
    params.dense.push_back(std::move(dp));
  }
  for (std::size_t h : config.hidden_dims) {
    BnParams bn;
    bn.gamma.assign(h, 1.0);
    bn.beta.assign(h, 0.0);
    bn.running_mean.assign(h, 0.0);
    bn.running_var.assign(h, 1.0);
    params.norm.push_back(std::move(bn));
  }

  for (const auto& d : params.dense) {
    params.adam.m.emplace_back(d.weight.size(), 0.0);
    params.adam.v.emplace_back(d.weight.size(), 0.0);
    params.adam.m.emplace_back(d.bias.size(), 0.0);
    params.adam.v.emplace_back(d.bias.size(), 0.0);
  }
  for (const auto& b : params.norm) {
    params.adam.m.emplace_back(b.gamma.size(), 0.0);
    params.adam.v.emplace_back(b.gamma.size(), 0.0);
    params.adam.m.emplace_back(b.beta.size(), 0.0);
    params.adam.v.emplace_back(b.beta.size(), 0.0);
  }
  return params;
}

inline Gradients zero_gradients(const ParameterSet& params) {
  Gradients g;
  for (const auto& d : params.dense) {
    DenseParams gd;
    gd.weight = MatD(d.weight.rows(), d.weight.cols(), 0.0);
    gd.bias.assign(d.bias.size(), 0.0);
    g.dense.push_back(std::move(gd));
  }
  for (const auto& b : params.norm) {
    Gradients::BnGrad gb;
    gb.gamma.assign(b.gamma.size(), 0.0);
    gb.beta.assign(b.beta.size(), 0.0);
    g.norm.push_back(std::move(gb));
  }
  return g;
}

inline ForwardResult forward(ParameterSet& params, const MatD& input, BnMode mode, Rng& rng) {
  ForwardResult res;
  auto* update = mode == BnMode::UpdateStats ? &params.norm : nullptr;
  res.probs = nn_detail::run_forward(params, input, mode, &rng, update, nullptr, &res.trace);
  return res;
}

inline ForwardResult forward(ParameterSet& params, const EmbeddingBatch& batch, BnMode mode,
                             Rng& rng) {
  return forward(params, to_double(batch.features), mode, rng);
}

/// Re-run a traced pass with its recorded masks and statistics. Does not
/// touch running statistics; output matches trace.probs bit-for-bit.
inline MatD replay_forward(const ParameterSet& params, const ForwardTrace& trace) {
  return nn_detail::run_forward(params, trace.input, trace.mode, nullptr, nullptr, &trace, nullptr);
}

/// Inference-mode probabilities (running statistics, no dropout).
inline MatD predict(const ParameterSet& params, const MatF& embeddings) {
  return nn_detail::run_forward(params, to_double(embeddings), BnMode::Inference, nullptr, nullptr,
                                nullptr, nullptr);
}

/// Backpropagate an upstream gradient (w.r.t. the output probabilities)
/// through a traced pass. BN running statistics receive no gradient; in
/// UpdateStats traces the batch statistics are differentiated through.
inline Gradients backward(const ForwardTrace& trace, const ParameterSet& params,
                          const MatD& upstream) {
  if (!upstream.same_shape(trace.probs)) throw ShapeError("backward: upstream gradient shape mismatch");
  const std::size_t n_hidden = params.config.hidden_dims.size();
  if (trace.layers.size() != n_hidden) throw ShapeError("backward: trace does not match parameters");
  const std::size_t rows = trace.input.rows();

  Gradients grads = zero_gradients(params);

  // sigmoid (with clamp gate)
  MatD delta(upstream.rows(), upstream.cols());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    const double p = trace.probs.values()[i];
    const bool clamped = p <= nn_detail::kProbLo || p >= nn_detail::kProbHi;
    delta.values()[i] = clamped ? 0.0 : upstream.values()[i] * p * (1.0 - p);
  }

  // output dense layer
  const MatD& last_in = n_hidden ? trace.layers.back().out : trace.input;
  {
    DenseParams& gd = grads.dense[n_hidden];
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t o = 0; o < gd.weight.rows(); ++o) {
        const double d = delta(r, o);
        gd.bias[o] += d;
        double* wrow = gd.weight.row(o);
        const double* in = last_in.row(r);
        for (std::size_t i = 0; i < gd.weight.cols(); ++i) wrow[i] += d * in[i];
      }
  }

  // gradient w.r.t. the output-layer input
  auto input_grad = [&](const MatD& d, const DenseParams& p) {
    MatD g(rows, p.weight.cols(), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      double* grow = g.row(r);
      for (std::size_t o = 0; o < p.weight.rows(); ++o) {
        const double dv = d(r, o);
        if (dv == 0.0) continue;
        const double* wrow = p.weight.row(o);
        for (std::size_t i = 0; i < p.weight.cols(); ++i) grow[i] += dv * wrow[i];
      }
    }
    return g;
  };

  MatD d_out = input_grad(delta, params.dense[n_hidden]);

  for (std::size_t li = n_hidden; li-- > 0;) {
    const ForwardTrace::Layer& t = trace.layers[li];
    const BnParams& bn = params.norm[li];
    const std::size_t width = t.pre_bn.cols();

    // dropout then ReLU
    MatD d_bn(rows, width);
    const bool has_mask = !t.dropout_mask.empty();
    for (std::size_t i = 0; i < d_bn.size(); ++i) {
      double g = d_out.values()[i];
      if (has_mask) g *= t.dropout_mask.values()[i];
      d_bn.values()[i] = t.bn_out.values()[i] > 0.0 ? g : 0.0;
    }

    // batch norm
    Gradients::BnGrad& gb = grads.norm[li];
    MatD d_pre(rows, width);
    const double inv_n = 1.0 / static_cast<double>(rows);
    for (std::size_t j = 0; j < width; ++j) {
      const double inv_std = 1.0 / std::sqrt(t.var[j] + nn_detail::kBnEps);
      double dgamma = 0.0, dbeta = 0.0;
      for (std::size_t r = 0; r < rows; ++r) {
        dgamma += d_bn(r, j) * t.xhat(r, j);
        dbeta += d_bn(r, j);
      }
      gb.gamma[j] += dgamma;
      gb.beta[j] += dbeta;

      if (trace.mode == BnMode::UpdateStats) {
        double dvar = 0.0, dmu_direct = 0.0, dev_sum = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
          const double dxhat = d_bn(r, j) * bn.gamma[j];
          const double dev = t.pre_bn(r, j) - t.mu[j];
          dvar += dxhat * dev;
          dmu_direct += dxhat;
          dev_sum += dev;
        }
        dvar *= -0.5 * inv_std * inv_std * inv_std;
        const double dmu = -dmu_direct * inv_std - 2.0 * dvar * dev_sum * inv_n;
        for (std::size_t r = 0; r < rows; ++r) {
          const double dxhat = d_bn(r, j) * bn.gamma[j];
          const double dev = t.pre_bn(r, j) - t.mu[j];
          d_pre(r, j) = dxhat * inv_std + 2.0 * dvar * dev * inv_n + dmu * inv_n;
        }
      } else {
        for (std::size_t r = 0; r < rows; ++r)
          d_pre(r, j) = d_bn(r, j) * bn.gamma[j] * inv_std;
      }
    }

    // dense layer beneath
    const MatD& layer_in = li ? trace.layers[li - 1].out : trace.input;
    DenseParams& gd = grads.dense[li];
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t o = 0; o < width; ++o) {
        const double d = d_pre(r, o);
        if (d == 0.0) continue;
        gd.bias[o] += d;
        double* wrow = gd.weight.row(o);
        const double* in = layer_in.row(r);
        for (std::size_t i = 0; i < gd.weight.cols(); ++i) wrow[i] += d * in[i];
      }
    if (li) d_out = input_grad(d_pre, params.dense[li]);
  }
  return grads;
}

/// One Adam update (beta1 0.9, beta2 0.999, eps 1e-8, bias correction).
/// Throws NumericError naming the parameter if its gradient is not finite.
inline void adam_step(ParameterSet& params, const Gradients& grads, double lr) {
  if (!(lr > 0.0)) throw ConfigError("adam_step: learning rate must be > 0");
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  struct Slot {
    std::string name;
    std::vector<double>* p;
    const std::vector<double>* g;
  };
  std::vector<Slot> slots;
  for (std::size_t l = 0; l < params.dense.size(); ++l) {
    slots.push_back({"dense" + std::to_string(l) + ".weight", &params.dense[l].weight.values(),
                     &grads.dense[l].weight.values()});
    slots.push_back(
        {"dense" + std::to_string(l) + ".bias", &params.dense[l].bias, &grads.dense[l].bias});
  }
  for (std::size_t l = 0; l < params.norm.size(); ++l) {
    slots.push_back({"bn" + std::to_string(l) + ".gamma", &params.norm[l].gamma, &grads.norm[l].gamma});
    slots.push_back({"bn" + std::to_string(l) + ".beta", &params.norm[l].beta, &grads.norm[l].beta});
  }
  if (slots.size() != params.adam.m.size()) throw ShapeError("adam_step: moment state mismatch");

  for (const Slot& s : slots) {
    if (s.p->size() != s.g->size()) throw ShapeError("adam_step: gradient shape mismatch at " + s.name);
    for (double g : *s.g)
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in " + s.name);
  }

  params.adam.steps += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(params.adam.steps));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(params.adam.steps));

  for (std::size_t si = 0; si < slots.size(); ++si) {
    auto& m = params.adam.m[si];
    auto& v = params.adam.v[si];
    auto& p = *slots[si].p;
    const auto& g = *slots[si].g;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

/// Cosine decay from lr_max at step 0 to lr_min at total_steps.
inline double cosine_lr(std::size_t step, std::size_t total_steps, double lr_max, double lr_min) {
  if (total_steps == 0) throw ConfigError("cosine_lr: total_steps must be > 0");
  if (step > total_steps) throw ConfigError("cosine_lr: step beyond total_steps");
  if (lr_max < lr_min) throw ConfigError("cosine_lr: lr_max below lr_min");
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(3.14159265358979323846 * frac));
}

}  // namespace mudas
