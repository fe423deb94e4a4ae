#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mudas/data.hpp"
#include "mudas/embed.hpp"
#include "mudas/errors.hpp"
#include "mudas/matrix.hpp"

namespace mudas {

/// Per-class probability range of the source model over the source set.
/// Used to normalize retention scores.
struct SourceRangeStats {
  std::vector<double> max_ws, min_ws;

  std::size_t classes() const { return max_ws.size(); }
};

/// Label-frequency weights: w_i = positives in class i / total positives.
struct ClassWeights {
  std::vector<double> w;
};

inline ClassWeights class_weights(const LabelMatrix& y) {
  if (y.rows() == 0 || y.cols() == 0) throw ShapeError("class_weights: empty label matrix");
  ClassWeights cw;
  cw.w.assign(y.cols(), 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c)
      if (y(r, c)) {
        cw.w[c] += 1.0;
        total += 1.0;
      }
  if (total == 0.0) throw Error("class_weights: label matrix has no positive label");
  for (auto& v : cw.w) v /= total;
  return cw;
}

/// Per-class max/min of a probability matrix, taken over rows.
inline SourceRangeStats compute_source_ranges(const MatD& z_ws) {
  if (z_ws.rows() == 0 || z_ws.cols() == 0) throw ShapeError("compute_source_ranges: empty input");
  SourceRangeStats st;
  st.max_ws.resize(z_ws.cols());
  st.min_ws.resize(z_ws.cols());
  for (std::size_t c = 0; c < z_ws.cols(); ++c) {
    double mx = z_ws(0, c), mn = z_ws(0, c);
    for (std::size_t r = 1; r < z_ws.rows(); ++r) {
      mx = std::max(mx, z_ws(r, c));
      mn = std::min(mn, z_ws(r, c));
    }
    st.max_ws[c] = mx;
    st.min_ws[c] = mn;
  }
  return st;
}

/// Retention score of one target prediction: the mean over classes of the
/// class-weighted probability normalized by the source probability range.
/// eps only guards degenerate (constant-probability) classes.
inline double d_score(const std::vector<double>& z_row, const SourceRangeStats& ranges,
                      const ClassWeights& weights, double eps = 1e-8) {
  const std::size_t k = z_row.size();
  if (ranges.classes() != k || weights.w.size() != k) throw ShapeError("d_score: class count mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double range = std::max(ranges.max_ws[i] - ranges.min_ws[i], eps);
    sum += weights.w[i] * z_row[i] / range;
  }
  return sum / static_cast<double>(k);
}

/// Capacity-bounded store of the highest-scoring embeddings seen so far.
/// When full, a newcomer must strictly beat the current minimum score;
/// ties keep the earlier arrival. Contents always equal the top-N of the
/// offered stream ordered by (score desc, arrival asc).
class SelectionBuffer {
 public:
  struct Entry {
    Embedding embedding;
    double d = 0.0;
    std::uint64_t arrival = 0;
  };

  enum class Outcome { Accepted, AcceptedWithEviction, Rejected };

  struct Decision {
    Outcome outcome = Outcome::Rejected;
    std::optional<Entry> evicted;

    bool accepted() const { return outcome != Outcome::Rejected; }
  };

  explicit SelectionBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("SelectionBuffer: capacity must be >= 1");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t evictions() const { return evictions_; }

  double min_d() const {
    if (entries_.empty()) throw Error("SelectionBuffer: empty");
    return entries_.begin()->d;
  }

  Decision offer(Embedding e, double d) {
    const std::uint64_t arrival = next_arrival_++;
    Decision decision;
    if (entries_.size() < capacity_) {
      entries_.insert({std::move(e), d, arrival});
      decision.outcome = Outcome::Accepted;
      return decision;
    }
    // worst entry: smallest score, latest arrival among equals
    auto worst = entries_.begin();
    if (d <= worst->d) return decision;  // equal scores keep the incumbent
    decision.evicted = *worst;
    entries_.erase(worst);
    entries_.insert({std::move(e), d, arrival});
    decision.outcome = Outcome::AcceptedWithEviction;
    ++evictions_;
    return decision;
  }

  /// Entries ordered by score descending, arrival ascending.
  std::vector<Entry> ranked() const {
    return std::vector<Entry>(entries_.rbegin(), entries_.rend());
  }

 private:
  struct WorstFirst {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.d != b.d) return a.d < b.d;
      return a.arrival > b.arrival;
    }
  };

  std::size_t capacity_;
  std::uint64_t next_arrival_ = 0;
  std::uint64_t evictions_ = 0;
  std::multiset<Entry, WorstFirst> entries_;
};

/// Persist buffer contents as an embedding file plus the aligned score
/// sidecar, in ranked order.
inline void save_buffer(const SelectionBuffer& buf, Domain domain, const std::string& emb_path,
                        const std::string& dsc_path) {
  const auto entries = buf.ranked();
  if (entries.empty()) throw Error("save_buffer: empty buffer");
  EmbeddingBatch batch;
  batch.domain = domain;
  batch.aug = AugTag::None;
  batch.features = MatF(entries.size(), entries.front().embedding.values.size());
  std::vector<double> scores(entries.size());
  for (std::size_t r = 0; r < entries.size(); ++r) {
    const auto& vals = entries[r].embedding.values;
    if (vals.size() != batch.features.cols()) throw ShapeError("save_buffer: ragged embeddings");
    for (std::size_t c = 0; c < vals.size(); ++c) batch.features(r, c) = vals[c];
    scores[r] = entries[r].d;
  }
  save_embeddings(batch, emb_path);
  save_dscores(scores, dsc_path);
}

}  // namespace mudas
