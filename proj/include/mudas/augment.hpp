#pragma once

#include <algorithm>
#include <cstddef>

#include "mudas/errors.hpp"
#include "mudas/matrix.hpp"
#include "mudas/rng.hpp"

namespace mudas {

/// Time-frequency magnitude grid. Rows are time frames, columns are
/// frequency bins; entries are non-negative.
struct Spectrogram {
  MatF grid;
  float frame_rate = 0.0f;

  std::size_t frames() const { return grid.rows(); }
  std::size_t bins() const { return grid.cols(); }
};

struct SpecAugmentConfig {
  std::size_t num_time_masks = 2;
  std::size_t max_time_width = 0;
  std::size_t num_freq_masks = 2;
  std::size_t max_freq_width = 0;

  /// Default widths are 10% of each axis, at least one cell.
  static SpecAugmentConfig defaults_for(const Spectrogram& s) {
    SpecAugmentConfig cfg;
    cfg.max_time_width = std::max<std::size_t>(1, s.frames() / 10);
    cfg.max_freq_width = std::max<std::size_t>(1, s.bins() / 10);
    return cfg;
  }

  void validate_for(const Spectrogram& s) const {
    if (max_time_width > s.frames()) throw ConfigError("SpecAugment: time mask width exceeds frame count");
    if (max_freq_width > s.bins()) throw ConfigError("SpecAugment: freq mask width exceeds bin count");
  }
};

/// Reverse the order of time frames. Involution: applying twice restores
/// the input exactly.
inline Spectrogram time_reverse(const Spectrogram& s) {
  Spectrogram out = s;
  for (std::size_t r = 0; r < s.frames(); ++r)
    for (std::size_t c = 0; c < s.bins(); ++c) out.grid(r, c) = s.grid(s.frames() - 1 - r, c);
  return out;
}

/// Weak augmentation: time-reversal applied with probability 0.5,
/// otherwise an unchanged copy.
inline Spectrogram weak_augment(const Spectrogram& s, Rng& rng) {
  return rng.bernoulli(0.5) ? time_reverse(s) : s;
}

struct MaskBand {
  std::size_t start = 0;
  std::size_t width = 0;
};

/// Zero a contiguous band of time frames in place.
inline void apply_time_mask(Spectrogram& s, MaskBand band) {
  const std::size_t end = std::min(band.start + band.width, s.frames());
  for (std::size_t r = band.start; r < end; ++r)
    for (std::size_t c = 0; c < s.bins(); ++c) s.grid(r, c) = 0.0f;
}

/// Zero a contiguous band of frequency bins in place.
inline void apply_freq_mask(Spectrogram& s, MaskBand band) {
  const std::size_t end = std::min(band.start + band.width, s.bins());
  for (std::size_t r = 0; r < s.frames(); ++r)
    for (std::size_t c = band.start; c < end; ++c) s.grid(r, c) = 0.0f;
}

namespace detail {

inline MaskBand draw_band(std::size_t extent, std::size_t max_width, Rng& rng) {
  MaskBand band;
  band.width = rng.uniform_index(max_width + 1);  // width in [0, max]
  band.start = band.width < extent ? rng.uniform_index(extent - band.width + 1) : 0;
  return band;
}

}  // namespace detail

/// Strong augmentation: SpecAugment-style masking. Draws the configured
/// number of time and frequency bands, each of uniform random width in
/// [0, max], and zeroes them. Bands may overlap.
inline Spectrogram strong_augment(const Spectrogram& s, const SpecAugmentConfig& cfg, Rng& rng) {
  cfg.validate_for(s);
  Spectrogram out = s;
  for (std::size_t i = 0; i < cfg.num_time_masks; ++i)
    apply_time_mask(out, detail::draw_band(s.frames(), cfg.max_time_width, rng));
  for (std::size_t i = 0; i < cfg.num_freq_masks; ++i)
    apply_freq_mask(out, detail::draw_band(s.bins(), cfg.max_freq_width, rng));
  return out;
}

}  // namespace mudas
