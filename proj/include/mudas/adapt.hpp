#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mudas/data.hpp"
#include "mudas/matrix.hpp"
#include "mudas/nn.hpp"
#include "mudas/rng.hpp"

namespace mudas {

/// Per-class pseudo-label cutoffs. c_plus >= c_minus for every class
/// (values are swapped when the raw formulas invert them).
struct ThresholdVector {
  std::vector<double> c_plus, c_minus;
  double tau_pos = 0.0, tau_neg = 0.0;
};

/// Batch means of the weakly augmented source and target probabilities.
struct AlignmentStats {
  std::vector<double> mean_ws, mean_wt;
};

struct LossBreakdown {
  double l_ws = 0.0, l_ss = 0.0;
  double l_pos = 0.0, l_neg = 0.0;
  double l_pos_div = 0.0, l_neg_div = 0.0;
  double total = 0.0;
  double t = 0.0;
  std::size_t pos_count = 0, neg_count = 0;

  std::string to_string() const {
    std::ostringstream ss;
    ss << "l_ws=" << l_ws << " l_ss=" << l_ss << " l_pos=" << l_pos << " l_neg=" << l_neg
       << " l_pos_div=" << l_pos_div << " l_neg_div=" << l_neg_div << " total=" << total
       << " t=" << t << " pos_labels=" << pos_count << " neg_labels=" << neg_count;
    return ss.str();
  }
};

enum class RampShape { Cosine, Linear };

struct AdaptConfig {
  double tau_pos = 0.9;
  double tau_neg = 0.9;
  std::size_t batch_source = 64;
  std::size_t batch_target = 64;
  std::size_t epochs = 50;
  double lr_max = 0.001;
  double lr_min = 0.00025;
  RampShape ramp = RampShape::Cosine;
  bool use_diversity = true;      // ablation switch for the two diversity terms
  bool negate_diversity = false;  // flip the diversity terms to an entropy penalty
  // static multipliers per loss group; the ramp t still scales the whole
  // unsupervised side. Recorded loss terms fold these in, so the total
  // identity holds at any setting.
  double group_weight_source = 1.0;
  double group_weight_target = 1.0;
  double group_weight_diversity = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (tau_pos <= 0.0 || tau_pos > 1.0 || tau_neg <= 0.0 || tau_neg > 1.0)
      throw ConfigError("AdaptConfig: thresholds must lie in (0, 1]");
    if (batch_source == 0 || batch_target == 0)
      throw ConfigError("AdaptConfig: batch sizes must be >= 1");
    if (!(lr_min > 0.0) || lr_max < lr_min)
      throw ConfigError("AdaptConfig: need lr_max >= lr_min > 0");
    if (group_weight_source < 0.0 || group_weight_target < 0.0 || group_weight_diversity < 0.0)
      throw ConfigError("AdaptConfig: group weights must be >= 0");
  }
};

namespace loss_detail {

constexpr double kClampLo = 1e-7;
constexpr double kClampHi = 1.0 - 1e-7;

inline double clamp_prob(double z) { return std::min(std::max(z, kClampLo), kClampHi); }
inline bool inside_clamp(double z) { return z > kClampLo && z < kClampHi; }

}  // namespace loss_detail

// ---------------------------------------------------------------------------
// Random probability interpolation
// ---------------------------------------------------------------------------

/// Elementwise convex blend with the given weights: lambda*z1 + (1-lambda)*z2.
inline MatD interpolate_with(const MatD& z1, const MatD& z2, const MatD& lambda) {
  if (!z1.same_shape(z2) || !z1.same_shape(lambda))
    throw ShapeError("interpolate: shape mismatch");
  MatD out(z1.rows(), z1.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double l = lambda.values()[i];
    out.values()[i] = l * z1.values()[i] + (1.0 - l) * z2.values()[i];
  }
  return out;
}

struct Interpolation {
  MatD probs;
  MatD lambda;  // kept so the backward pass can split gradients the same way
};

/// Blend two probability matrices with an independent Uniform[0,1] factor
/// per element.
inline Interpolation interpolate_probs(const MatD& z1, const MatD& z2, Rng& rng) {
  if (!z1.same_shape(z2)) throw ShapeError("interpolate: shape mismatch");
  Interpolation out;
  out.lambda = MatD(z1.rows(), z1.cols());
  for (auto& l : out.lambda.values()) l = rng.uniform01();
  out.probs = interpolate_with(z1, z2, out.lambda);
  return out;
}

// ---------------------------------------------------------------------------
// Distribution alignment
// ---------------------------------------------------------------------------

inline AlignmentStats alignment_stats(const MatD& z_ws, const MatD& z_wt) {
  if (!z_wt.empty() && z_ws.cols() != z_wt.cols())
    throw ShapeError("alignment_stats: class count mismatch");
  AlignmentStats st;
  const std::size_t k = z_ws.cols();
  st.mean_ws.assign(k, 0.0);
  st.mean_wt.assign(k, 0.0);
  for (std::size_t r = 0; r < z_ws.rows(); ++r)
    for (std::size_t c = 0; c < k; ++c) st.mean_ws[c] += z_ws(r, c);
  for (auto& v : st.mean_ws) v /= static_cast<double>(std::max<std::size_t>(1, z_ws.rows()));
  for (std::size_t r = 0; r < z_wt.rows(); ++r)
    for (std::size_t c = 0; c < k; ++c) st.mean_wt[c] += z_wt(r, c);
  for (auto& v : st.mean_wt) v /= static_cast<double>(std::max<std::size_t>(1, z_wt.rows()));
  return st;
}

/// Rescale target probabilities by the ratio of source to target batch
/// means, capped at 1. The result is the aligned pseudo-probability and
/// is treated as a constant by the backward pass.
inline MatD align_distribution(const MatD& z_wt, const AlignmentStats& stats, double eps = 1e-8) {
  MatD out(z_wt.rows(), z_wt.cols());
  for (std::size_t c = 0; c < z_wt.cols(); ++c) {
    const double ratio = stats.mean_ws[c] / std::max(stats.mean_wt[c], eps);
    for (std::size_t r = 0; r < z_wt.rows(); ++r)
      out(r, c) = std::min(z_wt(r, c) * ratio, 1.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Class-specific thresholds
// ---------------------------------------------------------------------------

/// Positive threshold scales the per-class max of the weak source
/// probabilities; negative threshold scales the complement of the
/// per-class min. If they cross, the two are swapped so c_plus is the
/// larger.
inline ThresholdVector compute_thresholds(const MatD& z_ws, double tau_pos, double tau_neg) {
  if (z_ws.rows() == 0 || z_ws.cols() == 0) throw ShapeError("compute_thresholds: empty batch");
  if (tau_pos <= 0.0 || tau_pos > 1.0 || tau_neg <= 0.0 || tau_neg > 1.0)
    throw ConfigError("compute_thresholds: thresholds must lie in (0, 1]");
  ThresholdVector th;
  th.tau_pos = tau_pos;
  th.tau_neg = tau_neg;
  const std::size_t k = z_ws.cols();
  th.c_plus.resize(k);
  th.c_minus.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    double mx = z_ws(0, c), mn = z_ws(0, c);
    for (std::size_t r = 1; r < z_ws.rows(); ++r) {
      mx = std::max(mx, z_ws(r, c));
      mn = std::min(mn, z_ws(r, c));
    }
    double pos = tau_pos * mx;
    double neg = 1.0 - tau_neg * (1.0 - mn);
    if (pos < neg) std::swap(pos, neg);
    th.c_plus[c] = pos;
    th.c_minus[c] = neg;
  }
  return th;
}

// ---------------------------------------------------------------------------
// Loss terms. All means run over rows x classes of the batch at hand;
// probabilities are clamped to [1e-7, 1 - 1e-7] before any logarithm.
// ---------------------------------------------------------------------------

/// Mean binary cross-entropy of one probability matrix against labels.
inline double bce_loss(const LabelMatrix& y, const MatD& z) {
  if (y.rows() != z.rows() || y.cols() != z.cols()) throw ShapeError("bce: shape mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zc = loss_detail::clamp_prob(z.values()[i]);
    sum += y.values()[i] ? std::log(zc) : std::log(1.0 - zc);
  }
  return -sum / static_cast<double>(z.size());
}

/// d(bce_loss)/dz. Zero where the clamp is engaged.
inline MatD bce_grad(const LabelMatrix& y, const MatD& z) {
  if (y.rows() != z.rows() || y.cols() != z.cols()) throw ShapeError("bce: shape mismatch");
  MatD g(z.rows(), z.cols(), 0.0);
  const double scale = 1.0 / static_cast<double>(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zv = z.values()[i];
    if (!loss_detail::inside_clamp(zv)) continue;
    g.values()[i] = y.values()[i] ? -scale / zv : scale / (1.0 - zv);
  }
  return g;
}

/// The two supervised losses: weak-view BCE and strong-view BCE.
inline std::pair<double, double> source_losses(const LabelMatrix& y, const MatD& z_ws,
                                               const MatD& z_ss) {
  return {bce_loss(y, z_ws), bce_loss(y, z_ss)};
}

namespace loss_detail {

template <typename Fn>
inline void for_each_pos(const MatD& aligned, const ThresholdVector& th, Fn&& fn) {
  for (std::size_t r = 0; r < aligned.rows(); ++r)
    for (std::size_t c = 0; c < aligned.cols(); ++c)
      if (aligned(r, c) >= th.c_plus[c]) fn(r, c);
}

template <typename Fn>
inline void for_each_neg(const MatD& aligned, const ThresholdVector& th, Fn&& fn) {
  for (std::size_t r = 0; r < aligned.rows(); ++r)
    for (std::size_t c = 0; c < aligned.cols(); ++c)
      if (aligned(r, c) <= th.c_minus[c]) fn(r, c);
}

}  // namespace loss_detail

/// Pseudo-label losses over the strong target probabilities. Cells whose
/// aligned probability clears c_plus are pushed toward 1; cells below
/// c_minus are pushed toward 0. The masks are constants.
inline std::pair<double, double> target_losses(const MatD& aligned, const MatD& z_st,
                                               const ThresholdVector& th) {
  if (!aligned.same_shape(z_st)) throw ShapeError("target_losses: shape mismatch");
  if (aligned.empty()) return {0.0, 0.0};
  const double scale = 1.0 / static_cast<double>(z_st.size());
  double pos = 0.0, neg = 0.0;
  loss_detail::for_each_pos(aligned, th, [&](std::size_t r, std::size_t c) {
    pos -= std::log(loss_detail::clamp_prob(z_st(r, c)));
  });
  loss_detail::for_each_neg(aligned, th, [&](std::size_t r, std::size_t c) {
    neg -= std::log(1.0 - loss_detail::clamp_prob(z_st(r, c)));
  });
  return {pos * scale, neg * scale};
}

inline std::pair<MatD, MatD> target_loss_grads(const MatD& aligned, const MatD& z_st,
                                               const ThresholdVector& th) {
  MatD g_pos(z_st.rows(), z_st.cols(), 0.0), g_neg(z_st.rows(), z_st.cols(), 0.0);
  if (aligned.empty()) return {std::move(g_pos), std::move(g_neg)};
  const double scale = 1.0 / static_cast<double>(z_st.size());
  loss_detail::for_each_pos(aligned, th, [&](std::size_t r, std::size_t c) {
    const double z = z_st(r, c);
    if (loss_detail::inside_clamp(z)) g_pos(r, c) = -scale / z;
  });
  loss_detail::for_each_neg(aligned, th, [&](std::size_t r, std::size_t c) {
    const double z = z_st(r, c);
    if (loss_detail::inside_clamp(z)) g_neg(r, c) = scale / (1.0 - z);
  });
  return {std::move(g_pos), std::move(g_neg)};
}

/// Diversity regularization over the pseudo-labeled cells: z*log(z) on
/// positives, (1-z)*log(1-z) on negatives. With negate=false the terms
/// enter as printed (each is <= 0 and minimized at z = 1 resp. z = 0
/// jointly with the target losses, damping overconfidence). negate flips
/// them into entropy-style penalties.
inline std::pair<double, double> diversity_losses(const MatD& aligned, const MatD& z_st,
                                                  const ThresholdVector& th, bool negate = false) {
  if (!aligned.same_shape(z_st)) throw ShapeError("diversity_losses: shape mismatch");
  if (aligned.empty()) return {0.0, 0.0};
  const double scale = (negate ? -1.0 : 1.0) / static_cast<double>(z_st.size());
  double pos = 0.0, neg = 0.0;
  loss_detail::for_each_pos(aligned, th, [&](std::size_t r, std::size_t c) {
    const double z = loss_detail::clamp_prob(z_st(r, c));
    pos += z * std::log(z);
  });
  loss_detail::for_each_neg(aligned, th, [&](std::size_t r, std::size_t c) {
    const double z = loss_detail::clamp_prob(z_st(r, c));
    neg += (1.0 - z) * std::log(1.0 - z);
  });
  return {pos * scale, neg * scale};
}

inline std::pair<MatD, MatD> diversity_loss_grads(const MatD& aligned, const MatD& z_st,
                                                  const ThresholdVector& th, bool negate = false) {
  MatD g_pos(z_st.rows(), z_st.cols(), 0.0), g_neg(z_st.rows(), z_st.cols(), 0.0);
  if (aligned.empty()) return {std::move(g_pos), std::move(g_neg)};
  const double scale = (negate ? -1.0 : 1.0) / static_cast<double>(z_st.size());
  loss_detail::for_each_pos(aligned, th, [&](std::size_t r, std::size_t c) {
    const double z = z_st(r, c);
    if (loss_detail::inside_clamp(z)) g_pos(r, c) = scale * (std::log(z) + 1.0);
  });
  loss_detail::for_each_neg(aligned, th, [&](std::size_t r, std::size_t c) {
    const double z = z_st(r, c);
    if (loss_detail::inside_clamp(z)) g_neg(r, c) = scale * (-std::log(1.0 - z) - 1.0);
  });
  return {std::move(g_pos), std::move(g_neg)};
}

inline std::size_t count_pos_labels(const MatD& aligned, const ThresholdVector& th) {
  std::size_t n = 0;
  if (!aligned.empty())
    loss_detail::for_each_pos(aligned, th, [&](std::size_t, std::size_t) { ++n; });
  return n;
}

inline std::size_t count_neg_labels(const MatD& aligned, const ThresholdVector& th) {
  std::size_t n = 0;
  if (!aligned.empty())
    loss_detail::for_each_neg(aligned, th, [&](std::size_t, std::size_t) { ++n; });
  return n;
}

// ---------------------------------------------------------------------------
// Time ramp
// ---------------------------------------------------------------------------

/// Weight of the target-side loss group: 0 at step 0, rising to 1 at
/// mid-training and staying there.
inline double ramp_weight(std::size_t step, std::size_t total_steps,
                          RampShape shape = RampShape::Cosine) {
  if (total_steps == 0) throw ConfigError("ramp_weight: total_steps must be > 0");
  if (step > total_steps) throw ConfigError("ramp_weight: step beyond total_steps");
  const double frac = std::min(1.0, 2.0 * static_cast<double>(step) / static_cast<double>(total_steps));
  if (shape == RampShape::Linear) return frac;
  return 0.5 - 0.5 * std::cos(3.14159265358979323846 * frac);
}

// ---------------------------------------------------------------------------
// Training step and loop
// ---------------------------------------------------------------------------

struct SourceBatch {
  MatD strong, weak;  // x^ss, x^ws
  LabelMatrix labels;
};

struct TargetBatch {
  MatD strong, weak;  // x^st, x^wt; zero rows allowed (source-only step)
};

/// One adaptation step.
///
/// Flow: (1) forward the combined batch [ss, ws, st, wt] with batch-stat
/// updates; (2) forward the source-only batch [ss, ws] against the frozen
/// running statistics; (3) blend the two source probability pairs with
/// per-element random factors; (4) align the weak target probabilities to
/// the weak source batch means; (5) derive per-class thresholds from the
/// blended weak source probabilities; (6) evaluate the six loss terms and
/// the ramped total; (7) backpropagate through the blended source
/// probabilities and the strong target probabilities (aligned
/// pseudo-probabilities, thresholds, masks, alignment means, and blend
/// factors are constants); (8) apply one Adam update at the cosine rate.
inline LossBreakdown train_step(ParameterSet& params, const SourceBatch& source,
                                const TargetBatch& target, const AdaptConfig& cfg,
                                std::size_t step, std::size_t total_steps, Rng& rng) {
  const std::size_t bs = source.strong.rows();
  const std::size_t bt = target.strong.rows();
  if (bs == 0) throw ShapeError("train_step: empty source batch");
  if (!source.strong.same_shape(source.weak) ||
      source.labels.rows() != bs)
    throw ShapeError("train_step: inconsistent source batch");
  if (!target.strong.same_shape(target.weak)) throw ShapeError("train_step: inconsistent target batch");

  const MatD combined =
      concat_rows<double>({&source.strong, &source.weak, &target.strong, &target.weak});

  ForwardResult first = forward(params, combined, BnMode::UpdateStats, rng);
  const MatD z_ss_first = slice_rows(first.probs, 0, bs);
  const MatD z_ws_first = slice_rows(first.probs, bs, 2 * bs);
  const MatD z_st = slice_rows(first.probs, 2 * bs, 2 * bs + bt);
  const MatD z_wt = slice_rows(first.probs, 2 * bs + bt, 2 * bs + 2 * bt);

  const MatD source_only = concat_rows<double>({&source.strong, &source.weak});
  ForwardResult second = forward(params, source_only, BnMode::FrozenStats, rng);
  const MatD z_ss_second = slice_rows(second.probs, 0, bs);
  const MatD z_ws_second = slice_rows(second.probs, bs, 2 * bs);

  const Interpolation ss = interpolate_probs(z_ss_first, z_ss_second, rng);
  const Interpolation ws = interpolate_probs(z_ws_first, z_ws_second, rng);

  const AlignmentStats stats = alignment_stats(ws.probs, z_wt);
  const MatD aligned = align_distribution(z_wt, stats);
  const ThresholdVector th = compute_thresholds(ws.probs, cfg.tau_pos, cfg.tau_neg);

  LossBreakdown loss;
  loss.t = ramp_weight(step, total_steps, cfg.ramp);
  std::tie(loss.l_ws, loss.l_ss) = source_losses(source.labels, ws.probs, ss.probs);
  std::tie(loss.l_pos, loss.l_neg) = target_losses(aligned, z_st, th);
  if (cfg.use_diversity)
    std::tie(loss.l_pos_div, loss.l_neg_div) =
        diversity_losses(aligned, z_st, th, cfg.negate_diversity);
  loss.l_ws *= cfg.group_weight_source;
  loss.l_ss *= cfg.group_weight_source;
  loss.l_pos *= cfg.group_weight_target;
  loss.l_neg *= cfg.group_weight_target;
  loss.l_pos_div *= cfg.group_weight_diversity;
  loss.l_neg_div *= cfg.group_weight_diversity;
  loss.pos_count = count_pos_labels(aligned, th);
  loss.neg_count = count_neg_labels(aligned, th);
  loss.total = (loss.l_ws + loss.l_ss) +
               loss.t * (loss.l_pos + loss.l_neg + loss.l_pos_div + loss.l_neg_div);
  if (!std::isfinite(loss.total))
    throw NumericError("train_step: non-finite loss at step " + std::to_string(step) + ": " +
                       loss.to_string());

  const MatD g_ss = bce_grad(source.labels, ss.probs);
  const MatD g_ws = bce_grad(source.labels, ws.probs);
  auto [g_pos, g_neg] = target_loss_grads(aligned, z_st, th);
  MatD g_pdiv(z_st.rows(), z_st.cols(), 0.0), g_ndiv(z_st.rows(), z_st.cols(), 0.0);
  if (cfg.use_diversity)
    std::tie(g_pdiv, g_ndiv) = diversity_loss_grads(aligned, z_st, th, cfg.negate_diversity);

  const std::size_t k = params.config.num_classes;
  MatD upstream_first(2 * bs + 2 * bt, k, 0.0);
  MatD upstream_second(2 * bs, k, 0.0);
  const double w_src = cfg.group_weight_source;
  for (std::size_t r = 0; r < bs; ++r)
    for (std::size_t c = 0; c < k; ++c) {
      upstream_first(r, c) = w_src * ss.lambda(r, c) * g_ss(r, c);
      upstream_first(bs + r, c) = w_src * ws.lambda(r, c) * g_ws(r, c);
      upstream_second(r, c) = w_src * (1.0 - ss.lambda(r, c)) * g_ss(r, c);
      upstream_second(bs + r, c) = w_src * (1.0 - ws.lambda(r, c)) * g_ws(r, c);
    }
  for (std::size_t r = 0; r < bt; ++r)
    for (std::size_t c = 0; c < k; ++c)
      upstream_first(2 * bs + r, c) =
          loss.t * (cfg.group_weight_target * (g_pos(r, c) + g_neg(r, c)) +
                    cfg.group_weight_diversity * (g_pdiv(r, c) + g_ndiv(r, c)));
  // the z_wt block stays zero: the aligned pseudo-probabilities are constants

  Gradients grads = backward(first.trace, params, upstream_first);
  grads.add(backward(second.trace, params, upstream_second));

  adam_step(params, grads, cosine_lr(step, total_steps, cfg.lr_max, cfg.lr_min));
  return loss;
}

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double lr = 0.0;
  LossBreakdown loss;
};

struct EpochRecord {
  std::size_t epoch = 0;
  LossBreakdown mean;  // loss fields averaged over the epoch's steps
  double lr = 0.0;     // rate at the last step of the epoch
  std::size_t pos_count = 0, neg_count = 0;  // summed over the epoch
};

struct TrainingReport {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
};

struct AdaptResult {
  ParameterSet params;
  TrainingReport report;
};

namespace adapt_detail {

inline void shuffle(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
}

inline MatD gather_rows(const MatF& m, const std::vector<std::size_t>& order, std::size_t begin,
                        std::size_t end) {
  MatD out(end - begin, m.cols());
  for (std::size_t i = begin; i < end; ++i)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(i - begin, c) = static_cast<double>(m(order[i % order.size()], c));
  return out;
}

inline LabelMatrix gather_labels(const LabelMatrix& m, const std::vector<std::size_t>& order,
                                 std::size_t begin, std::size_t end) {
  LabelMatrix out(end - begin, m.cols());
  for (std::size_t i = begin; i < end; ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) out(i - begin, c) = m(order[i % order.size()], c);
  return out;
}

inline EpochRecord summarize_epoch(const TrainingReport& report, std::size_t epoch) {
  EpochRecord rec;
  rec.epoch = epoch;
  std::size_t n = 0;
  for (const StepRecord& s : report.steps) {
    if (s.epoch != epoch) continue;
    rec.mean.l_ws += s.loss.l_ws;
    rec.mean.l_ss += s.loss.l_ss;
    rec.mean.l_pos += s.loss.l_pos;
    rec.mean.l_neg += s.loss.l_neg;
    rec.mean.l_pos_div += s.loss.l_pos_div;
    rec.mean.l_neg_div += s.loss.l_neg_div;
    rec.mean.total += s.loss.total;
    rec.mean.t += s.loss.t;
    rec.pos_count += s.loss.pos_count;
    rec.neg_count += s.loss.neg_count;
    rec.lr = s.lr;
    ++n;
  }
  if (n) {
    const double inv = 1.0 / static_cast<double>(n);
    rec.mean.l_ws *= inv;
    rec.mean.l_ss *= inv;
    rec.mean.l_pos *= inv;
    rec.mean.l_neg *= inv;
    rec.mean.l_pos_div *= inv;
    rec.mean.l_neg_div *= inv;
    rec.mean.total *= inv;
    rec.mean.t *= inv;
  }
  return rec;
}

}  // namespace adapt_detail

/// Full adaptation run: labeled source set plus unlabeled target set.
/// One epoch is one pass over the source set in batches of batch_source,
/// with a target batch of batch_target drawn cyclically (both orders
/// reshuffled every epoch). Weak and strong views of a stored embedding
/// are the embedding itself; the stochastic asymmetry between the views
/// comes from the dual-batch protocol, dropout, and the random blending.
inline AdaptResult adapt(const LabeledSet& source, const UnlabeledSet& target,
                         const AdaptConfig& cfg, const ClassifierConfig& model_cfg,
                         const ParameterSet* init = nullptr) {
  cfg.validate();
  model_cfg.validate();
  if (source.embeddings.rows() == 0) throw ShapeError("adapt: empty source set");
  if (source.labels.rows() != source.embeddings.rows())
    throw ShapeError("adapt: source label rows do not match embeddings");
  if (target.embeddings.rows() > 0 && target.embeddings.cols() != source.embeddings.cols())
    throw ShapeError("adapt: source/target dimension mismatch");

  AdaptResult res;
  res.params = init ? *init : init_parameters(model_cfg);
  if (source.embeddings.cols() != res.params.config.input_dim)
    throw ShapeError("adapt: embedding dimension does not match the model");
  if (source.labels.cols() != res.params.config.num_classes)
    throw ShapeError("adapt: label class count does not match the model");
  if (cfg.epochs == 0) return res;

  const std::size_t n = source.embeddings.rows();
  const std::size_t m = target.embeddings.rows();
  const std::size_t steps_per_epoch = (n + cfg.batch_source - 1) / cfg.batch_source;
  const std::size_t total_steps = cfg.epochs * steps_per_epoch;

  Rng rng = Rng(cfg.seed).derive(0x616461);
  std::vector<std::size_t> src_order(n), tgt_order(std::max<std::size_t>(m, 1));
  std::iota(src_order.begin(), src_order.end(), 0);
  std::iota(tgt_order.begin(), tgt_order.end(), 0);

  std::size_t global = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    adapt_detail::shuffle(src_order, rng);
    if (m > 0) adapt_detail::shuffle(tgt_order, rng);
    std::size_t tgt_cursor = 0;
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_source) {
      const std::size_t end = std::min(n, begin + cfg.batch_source);
      SourceBatch sb;
      sb.strong = adapt_detail::gather_rows(source.embeddings, src_order, begin, end);
      sb.weak = sb.strong;
      sb.labels = adapt_detail::gather_labels(source.labels, src_order, begin, end);

      TargetBatch tb;
      if (m > 0) {
        tb.strong = adapt_detail::gather_rows(target.embeddings, tgt_order, tgt_cursor,
                                              tgt_cursor + cfg.batch_target);
        tb.weak = tb.strong;
        tgt_cursor += cfg.batch_target;
      } else {
        tb.strong = MatD(0, source.embeddings.cols());
        tb.weak = tb.strong;
      }

      StepRecord rec;
      rec.epoch = epoch;
      rec.step = global;
      rec.lr = cosine_lr(global, total_steps, cfg.lr_max, cfg.lr_min);
      rec.loss = train_step(res.params, sb, tb, cfg, global, total_steps, rng);
      res.report.steps.push_back(rec);
      ++global;
    }
    res.report.epochs.push_back(adapt_detail::summarize_epoch(res.report, epoch));
  }
  return res;
}

/// Supervised BCE baseline trainer (the lower/upper reference models).
/// Same batching, optimizer, and schedule as adapt, but a single forward
/// pass per step and only the plain BCE loss.
inline AdaptResult train_supervised(const LabeledSet& data, const AdaptConfig& cfg,
                                    const ClassifierConfig& model_cfg,
                                    const ParameterSet* init = nullptr) {
  cfg.validate();
  model_cfg.validate();
  if (data.embeddings.rows() == 0) throw ShapeError("train_supervised: empty data set");
  if (data.labels.rows() != data.embeddings.rows())
    throw ShapeError("train_supervised: label rows do not match embeddings");

  AdaptResult res;
  res.params = init ? *init : init_parameters(model_cfg);
  if (data.embeddings.cols() != res.params.config.input_dim)
    throw ShapeError("train_supervised: embedding dimension does not match the model");
  if (data.labels.cols() != res.params.config.num_classes)
    throw ShapeError("train_supervised: label class count does not match the model");
  if (cfg.epochs == 0) return res;

  const std::size_t n = data.embeddings.rows();
  const std::size_t steps_per_epoch = (n + cfg.batch_source - 1) / cfg.batch_source;
  const std::size_t total_steps = cfg.epochs * steps_per_epoch;

  Rng rng = Rng(cfg.seed).derive(0x626365);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::size_t global = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    adapt_detail::shuffle(order, rng);
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_source) {
      const std::size_t end = std::min(n, begin + cfg.batch_source);
      const MatD batch = adapt_detail::gather_rows(data.embeddings, order, begin, end);
      const LabelMatrix labels = adapt_detail::gather_labels(data.labels, order, begin, end);

      ForwardResult fwd = forward(res.params, batch, BnMode::UpdateStats, rng);
      StepRecord rec;
      rec.epoch = epoch;
      rec.step = global;
      rec.lr = cosine_lr(global, total_steps, cfg.lr_max, cfg.lr_min);
      rec.loss.l_ws = bce_loss(labels, fwd.probs);
      rec.loss.total = rec.loss.l_ws;
      if (!std::isfinite(rec.loss.total))
        throw NumericError("train_supervised: non-finite loss at step " + std::to_string(global));

      const Gradients grads = backward(fwd.trace, res.params, bce_grad(labels, fwd.probs));
      adam_step(res.params, grads, rec.lr);
      res.report.steps.push_back(rec);
      ++global;
    }
    res.report.epochs.push_back(adapt_detail::summarize_epoch(res.report, epoch));
  }
  return res;
}

}  // namespace mudas
