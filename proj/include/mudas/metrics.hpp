#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <vector>

#include "mudas/errors.hpp"
#include "mudas/matrix.hpp"

namespace mudas {

struct PrPoint {
  double threshold;
  double precision;
  double recall;
};

/// Precision-recall curve walked from the highest score threshold down.
/// Tied scores enter the confusion counts as one group, so recall is
/// non-decreasing along the point list.
struct PrCurve {
  std::vector<PrPoint> points;
};

struct MetricReport {
  double micro_auprc = 0.0;
  double macro_auprc = 0.0;
  double f1_at_half = 0.0;
  std::vector<double> per_class_auprc;  // NaN for skipped classes
  std::size_t classes_evaluated = 0;
  std::size_t classes_skipped = 0;
};

inline PrCurve pr_curve(const std::vector<std::uint8_t>& y, const std::vector<double>& scores) {
  if (y.size() != scores.size()) throw ShapeError("pr_curve: length mismatch");
  std::size_t total_pos = 0;
  for (auto v : y) total_pos += v ? 1 : 0;
  if (total_pos == 0) throw Error("pr_curve: no positive labels");

  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  PrCurve curve;
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    // consume the whole tie group before emitting a point
    while (i < order.size() && scores[order[i]] == threshold) {
      if (y[order[i]])
        ++tp;
      else
        ++fp;
      ++i;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    curve.points.push_back({threshold, precision, recall});
  }
  return curve;
}

/// Step-wise average precision: sum of precision at each curve point
/// weighted by the recall gained at that point.
inline double average_precision(const std::vector<std::uint8_t>& y,
                                const std::vector<double>& scores) {
  const PrCurve curve = pr_curve(y, scores);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (const PrPoint& p : curve.points) {
    ap += (p.recall - prev_recall) * p.precision;
    prev_recall = p.recall;
  }
  return ap;
}

namespace detail {

inline void pool_cells(const LabelMatrix& y, const MatD& z, std::vector<std::uint8_t>& y_out,
                       std::vector<double>& z_out) {
  if (y.rows() != z.rows() || y.cols() != z.cols())
    throw ShapeError("metrics: label/probability shape mismatch");
  y_out.assign(y.values().begin(), y.values().end());
  z_out.assign(z.values().begin(), z.values().end());
}

inline std::size_t column_positives(const LabelMatrix& y, std::size_t c) {
  std::size_t n = 0;
  for (std::size_t r = 0; r < y.rows(); ++r) n += y(r, c) ? 1 : 0;
  return n;
}

inline void extract_column(const LabelMatrix& y, const MatD& z, std::size_t c,
                           std::vector<std::uint8_t>& y_out, std::vector<double>& z_out) {
  y_out.resize(y.rows());
  z_out.resize(y.rows());
  for (std::size_t r = 0; r < y.rows(); ++r) {
    y_out[r] = y(r, c);
    z_out[r] = z(r, c);
  }
}

}  // namespace detail

/// All (row, class) cells pooled into a single binary ranking problem.
inline double micro_auprc(const LabelMatrix& y, const MatD& z) {
  std::vector<std::uint8_t> yv;
  std::vector<double> zv;
  detail::pool_cells(y, z, yv, zv);
  return average_precision(yv, zv);
}

/// Mean per-class average precision over classes that have at least one
/// positive; positive-free classes are skipped and counted.
inline double macro_auprc(const LabelMatrix& y, const MatD& z, std::size_t* evaluated = nullptr,
                          std::size_t* skipped = nullptr) {
  if (y.rows() != z.rows() || y.cols() != z.cols())
    throw ShapeError("metrics: label/probability shape mismatch");
  double sum = 0.0;
  std::size_t used = 0, skip = 0;
  std::vector<std::uint8_t> yc;
  std::vector<double> zc;
  for (std::size_t c = 0; c < y.cols(); ++c) {
    if (detail::column_positives(y, c) == 0) {
      ++skip;
      continue;
    }
    detail::extract_column(y, z, c, yc, zc);
    sum += average_precision(yc, zc);
    ++used;
  }
  if (used == 0) throw Error("macro_auprc: no class has a positive label");
  if (evaluated) *evaluated = used;
  if (skipped) *skipped = skip;
  return sum / static_cast<double>(used);
}

/// Micro-pooled F1 after binarizing at the threshold. Returns 0 when
/// precision + recall is 0.
inline double f1_at(const LabelMatrix& y, const MatD& z, double threshold = 0.5) {
  if (y.rows() != z.rows() || y.cols() != z.cols())
    throw ShapeError("metrics: label/probability shape mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool pred = z.values()[i] >= threshold;
    const bool truth = y.values()[i] != 0;
    if (pred && truth)
      ++tp;
    else if (pred && !truth)
      ++fp;
    else if (!pred && truth)
      ++fn;
  }
  const double denom = 2.0 * tp + fp + fn;
  if (denom == 0.0) return 0.0;
  return 2.0 * static_cast<double>(tp) / denom;
}

inline MetricReport evaluate_metrics(const LabelMatrix& y, const MatD& z) {
  MetricReport rep;
  rep.micro_auprc = micro_auprc(y, z);
  rep.per_class_auprc.assign(y.cols(), std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  std::vector<std::uint8_t> yc;
  std::vector<double> zc;
  for (std::size_t c = 0; c < y.cols(); ++c) {
    if (detail::column_positives(y, c) == 0) {
      ++rep.classes_skipped;
      continue;
    }
    detail::extract_column(y, z, c, yc, zc);
    rep.per_class_auprc[c] = average_precision(yc, zc);
    sum += rep.per_class_auprc[c];
    ++rep.classes_evaluated;
  }
  if (rep.classes_evaluated == 0) throw Error("evaluate_metrics: no class has a positive label");
  rep.macro_auprc = sum / static_cast<double>(rep.classes_evaluated);
  rep.f1_at_half = f1_at(y, z, 0.5);
  return rep;
}

/// Per-class PR points as CSV: class,threshold,precision,recall.
/// Positive-free classes emit no rows.
inline void write_pr_curve_csv(std::ostream& os, const LabelMatrix& y, const MatD& z) {
  os << "class,threshold,precision,recall\n";
  std::vector<std::uint8_t> yc;
  std::vector<double> zc;
  for (std::size_t c = 0; c < y.cols(); ++c) {
    if (detail::column_positives(y, c) == 0) continue;
    detail::extract_column(y, z, c, yc, zc);
    for (const PrPoint& p : pr_curve(yc, zc).points)
      os << c << ',' << p.threshold << ',' << p.precision << ',' << p.recall << '\n';
  }
}

}  // namespace mudas
