#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mudas/augment.hpp"
#include "mudas/errors.hpp"
#include "mudas/matrix.hpp"
#include "mudas/rng.hpp"

namespace mudas {

enum class Domain : std::uint8_t { Source = 0, Target = 1 };
enum class AugTag : std::uint8_t { None = 0, Weak = 1, Strong = 2 };

/// One fixed-dimension feature vector with domain and augmentation tags.
struct Embedding {
  std::vector<float> values;
  Domain domain = Domain::Source;
  AugTag aug = AugTag::None;
};

/// Rows of embeddings sharing one domain and augmentation tag.
struct EmbeddingBatch {
  MatF features;
  Domain domain = Domain::Source;
  AugTag aug = AugTag::None;

  std::size_t rows() const { return features.rows(); }
  std::size_t dim() const { return features.cols(); }
};

enum class ExtractorKind { Stub, File };

/// Extraction recipe. The stub kind replaces the pre-trained embedding
/// network: mean-pool over time, seeded random projection, L2
/// normalization. The file kind marks datasets whose embeddings were
/// produced elsewhere and only enter through file ingestion.
struct ExtractorSpec {
  ExtractorKind kind = ExtractorKind::Stub;
  std::uint64_t stub_seed = 0;
  std::size_t output_dim = 256;
};

/// Deterministic stub extractor. Pools each frequency bin over time,
/// projects the pooled vector to output_dim with a projection drawn from
/// stub_seed, and L2-normalizes. An all-zero spectrogram maps to the zero
/// vector (the normalization guard skips division).
inline Embedding extract(const Spectrogram& spec, const ExtractorSpec& ex) {
  if (ex.kind == ExtractorKind::File)
    throw UnsupportedError("extract: file-kind embeddings bypass extraction");
  if (spec.grid.empty()) throw ShapeError("extract: empty spectrogram");

  const std::size_t bins = spec.bins();
  std::vector<double> pooled(bins, 0.0);
  for (std::size_t r = 0; r < spec.frames(); ++r)
    for (std::size_t c = 0; c < bins; ++c) pooled[c] += spec.grid(r, c);
  for (auto& v : pooled) v /= static_cast<double>(spec.frames());

  // Projection rows are regenerated from the seed on every call, so a
  // given (seed, bins, output_dim) triple always maps the same way.
  Rng rng(ex.stub_seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(bins));
  std::vector<double> projected(ex.output_dim, 0.0);
  for (std::size_t i = 0; i < ex.output_dim; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < bins; ++c) acc += rng.normal() * scale * pooled[c];
    projected[i] = acc;
  }

  double norm_sq = 0.0;
  for (double v : projected) norm_sq += v * v;
  const double norm = std::sqrt(norm_sq);

  Embedding out;
  out.values.resize(ex.output_dim);
  for (std::size_t i = 0; i < ex.output_dim; ++i) {
    const double v = norm > 0.0 ? projected[i] / norm : 0.0;
    out.values[i] = static_cast<float>(v);
  }
  return out;
}

}  // namespace mudas
