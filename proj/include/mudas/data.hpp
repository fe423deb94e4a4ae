#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mudas/embed.hpp"
#include "mudas/errors.hpp"
#include "mudas/matrix.hpp"
#include "mudas/rng.hpp"

namespace mudas {

struct LabeledSet {
  MatF embeddings;  // n x d
  LabelMatrix labels;  // n x k
  Domain domain = Domain::Source;
};

struct UnlabeledSet {
  MatF embeddings;  // m x d
  Domain domain = Domain::Target;
};

/// Synthetic multi-label benchmark recipe. Samples draw independent
/// Bernoulli label bits; each embedding is the sum of the prototypes of
/// its active classes plus Gaussian noise, L2-normalized. The target
/// domain rotates and translates the prototypes before synthesis, which
/// is the domain shift.
struct SyntheticSpec {
  std::size_t num_classes = 6;
  std::size_t dims = 256;
  std::uint64_t prototype_seed = 99;
  double label_prior = 0.3;
  double shift_rotation = 0.5;     // radians, applied over disjoint coordinate planes
  double shift_translation = 2.0;  // length of the common prototype offset
  double noise_sigma = 0.3;
  std::size_t samples_source = 500;
  std::size_t samples_target = 500;

  void validate() const {
    if (num_classes == 0 || dims == 0) throw ConfigError("SyntheticSpec: classes and dims must be >= 1");
    if (label_prior < 0.0 || label_prior >= 1.0) throw ConfigError("SyntheticSpec: label prior outside [0, 1)");
    if (noise_sigma <= 0.0) throw ConfigError("SyntheticSpec: noise sigma must be > 0");
    if (samples_source == 0 || samples_target == 0) throw ConfigError("SyntheticSpec: sample counts must be >= 1");
  }
};

namespace detail {

inline std::vector<std::vector<double>> make_prototypes(const SyntheticSpec& spec) {
  Rng rng(spec.prototype_seed);
  std::vector<std::vector<double>> protos(spec.num_classes, std::vector<double>(spec.dims));
  for (auto& p : protos) {
    double norm_sq = 0.0;
    for (auto& v : p) {
      v = rng.normal();
      norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > 0.0)
      for (auto& v : p) v /= norm;
  }
  return protos;
}

/// Rotate by the angle in the planes (0,1), (2,3), ... and add a common
/// offset drawn from the prototype seed.
inline void shift_prototypes(std::vector<std::vector<double>>& protos, const SyntheticSpec& spec) {
  const double c = std::cos(spec.shift_rotation);
  const double s = std::sin(spec.shift_rotation);
  for (auto& p : protos) {
    for (std::size_t i = 0; i + 1 < spec.dims; i += 2) {
      const double a = p[i], b = p[i + 1];
      p[i] = c * a - s * b;
      p[i + 1] = s * a + c * b;
    }
  }
  if (spec.shift_translation != 0.0) {
    Rng rng = Rng(spec.prototype_seed).derive(0x7453);
    std::vector<double> offset(spec.dims);
    double norm_sq = 0.0;
    for (auto& v : offset) {
      v = rng.normal();
      norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    for (auto& p : protos)
      for (std::size_t i = 0; i < spec.dims; ++i)
        p[i] += spec.shift_translation * offset[i] / (norm > 0.0 ? norm : 1.0);
  }
}

inline LabeledSet synthesize(const std::vector<std::vector<double>>& protos,
                             const SyntheticSpec& spec, std::size_t count, Domain domain,
                             Rng rng) {
  LabeledSet set;
  set.domain = domain;
  set.embeddings = MatF(count, spec.dims);
  set.labels = LabelMatrix(count, spec.num_classes);
  std::vector<double> x(spec.dims);
  for (std::size_t r = 0; r < count; ++r) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t cls = 0; cls < spec.num_classes; ++cls) {
      const bool active = rng.bernoulli(spec.label_prior);
      set.labels(r, cls) = active ? 1 : 0;
      if (active)
        for (std::size_t i = 0; i < spec.dims; ++i) x[i] += protos[cls][i];
    }
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < spec.dims; ++i) {
      x[i] += spec.noise_sigma * rng.normal();
      norm_sq += x[i] * x[i];
    }
    const double norm = std::sqrt(norm_sq);
    for (std::size_t i = 0; i < spec.dims; ++i)
      set.embeddings(r, i) = static_cast<float>(norm > 0.0 ? x[i] / norm : 0.0);
  }
  return set;
}

}  // namespace detail

/// Generate a (source, target) pair. Target labels are produced too but
/// exist for evaluation only; adaptation never sees them.
inline std::pair<LabeledSet, LabeledSet> gen_synthetic(const SyntheticSpec& spec,
                                                       std::uint64_t seed) {
  spec.validate();
  auto protos = detail::make_prototypes(spec);
  LabeledSet source =
      detail::synthesize(protos, spec, spec.samples_source, Domain::Source, Rng(seed).derive(1));
  detail::shift_prototypes(protos, spec);
  LabeledSet target =
      detail::synthesize(protos, spec, spec.samples_target, Domain::Target, Rng(seed).derive(2));
  return {std::move(source), std::move(target)};
}

// ---------------------------------------------------------------------------
// Binary file formats. All multi-byte values are little-endian; payloads are
// f32. Magic strings: EMB1 (embedding rows), DSC1 (selection score sidecar),
// SPG1 (spectrogram grid).
// ---------------------------------------------------------------------------

namespace detail {

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n, const char* what) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw FormatError(std::string("truncated file while reading ") + what);
}

inline void write_u32(std::ostream& os, std::uint32_t v) { write_bytes(os, &v, 4); }
inline void write_f32(std::ostream& os, float v) { write_bytes(os, &v, 4); }

inline std::uint32_t read_u32(std::istream& is, const char* what) {
  std::uint32_t v = 0;
  read_bytes(is, &v, 4, what);
  return v;
}

inline float read_f32(std::istream& is, const char* what) {
  float v = 0;
  read_bytes(is, &v, 4, what);
  return v;
}

inline void expect_magic(std::istream& is, const char* magic, const char* format_name) {
  std::array<char, 4> got{};
  is.read(got.data(), 4);
  if (is.gcount() != 4 || std::memcmp(got.data(), magic, 4) != 0)
    throw FormatError(std::string("bad magic: expected \"") + magic + "\" (" + format_name + ")");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  return os;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open for reading: " + path);
  return is;
}

}  // namespace detail

inline void save_embeddings(const EmbeddingBatch& batch, const std::string& path) {
  auto os = detail::open_out(path);
  os.write("EMB1", 4);
  detail::write_u32(os, 1);  // format version
  detail::write_u32(os, static_cast<std::uint32_t>(batch.rows()));
  detail::write_u32(os, static_cast<std::uint32_t>(batch.dim()));
  const std::uint8_t tags[2] = {static_cast<std::uint8_t>(batch.domain),
                                static_cast<std::uint8_t>(batch.aug)};
  detail::write_bytes(os, tags, 2);
  detail::write_bytes(os, batch.features.values().data(), batch.features.size() * sizeof(float));
  if (!os) throw Error("write failed: " + path);
}

inline EmbeddingBatch load_embeddings(const std::string& path) {
  auto is = detail::open_in(path);
  detail::expect_magic(is, "EMB1", "embedding file");
  const std::uint32_t version = detail::read_u32(is, "EMB1 version");
  if (version != 1) throw FormatError("EMB1: unsupported version");
  const std::uint32_t rows = detail::read_u32(is, "EMB1 row count");
  const std::uint32_t dim = detail::read_u32(is, "EMB1 dimension");
  std::uint8_t tags[2];
  detail::read_bytes(is, tags, 2, "EMB1 tags");
  if (tags[0] > 1 || tags[1] > 2) throw FormatError("EMB1: invalid domain/augmentation tag");

  EmbeddingBatch batch;
  batch.domain = static_cast<Domain>(tags[0]);
  batch.aug = static_cast<AugTag>(tags[1]);
  batch.features = MatF(rows, dim);
  detail::read_bytes(is, batch.features.values().data(),
                     static_cast<std::size_t>(rows) * dim * sizeof(float), "EMB1 payload");
  char extra;
  if (is.read(&extra, 1)) throw FormatError("EMB1: trailing bytes after payload");
  return batch;
}

inline void save_dscores(const std::vector<double>& scores, const std::string& path) {
  auto os = detail::open_out(path);
  os.write("DSC1", 4);
  detail::write_u32(os, static_cast<std::uint32_t>(scores.size()));
  for (double d : scores) detail::write_f32(os, static_cast<float>(d));
  if (!os) throw Error("write failed: " + path);
}

inline std::vector<double> load_dscores(const std::string& path) {
  auto is = detail::open_in(path);
  detail::expect_magic(is, "DSC1", "selection score sidecar");
  const std::uint32_t count = detail::read_u32(is, "DSC1 count");
  std::vector<double> scores(count);
  for (auto& d : scores) d = detail::read_f32(is, "DSC1 value");
  return scores;
}

inline void save_spectrogram(const Spectrogram& s, const std::string& path) {
  auto os = detail::open_out(path);
  os.write("SPG1", 4);
  detail::write_u32(os, static_cast<std::uint32_t>(s.frames()));
  detail::write_u32(os, static_cast<std::uint32_t>(s.bins()));
  detail::write_f32(os, s.frame_rate);
  detail::write_bytes(os, s.grid.values().data(), s.grid.size() * sizeof(float));
  if (!os) throw Error("write failed: " + path);
}

inline Spectrogram load_spectrogram(const std::string& path) {
  auto is = detail::open_in(path);
  detail::expect_magic(is, "SPG1", "spectrogram file");
  const std::uint32_t frames = detail::read_u32(is, "SPG1 frames");
  const std::uint32_t bins = detail::read_u32(is, "SPG1 bins");
  Spectrogram s;
  s.frame_rate = detail::read_f32(is, "SPG1 frame rate");
  s.grid = MatF(frames, bins);
  detail::read_bytes(is, s.grid.values().data(),
                     static_cast<std::size_t>(frames) * bins * sizeof(float), "SPG1 payload");
  return s;
}

// ---------------------------------------------------------------------------
// Label CSV: one header row of class names, then rows of 0/1 cells.
// ---------------------------------------------------------------------------

struct LabelFile {
  std::vector<std::string> class_names;
  LabelMatrix labels;
};

inline void save_labels(const LabelFile& file, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open for writing: " + path);
  for (std::size_t c = 0; c < file.class_names.size(); ++c)
    os << (c ? "," : "") << file.class_names[c];
  os << '\n';
  for (std::size_t r = 0; r < file.labels.rows(); ++r) {
    for (std::size_t c = 0; c < file.labels.cols(); ++c)
      os << (c ? "," : "") << static_cast<int>(file.labels(r, c));
    os << '\n';
  }
  if (!os) throw Error("write failed: " + path);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace detail

inline LabelFile load_labels(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("labels CSV: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  LabelFile file;
  file.class_names = detail::split_csv_line(line);
  if (file.class_names.empty()) throw FormatError("labels CSV: empty header row");
  const std::size_t k = file.class_names.size();

  std::vector<std::uint8_t> cells;
  std::size_t row_index = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto row = detail::split_csv_line(line);
    if (row.size() != k)
      throw FormatError("labels CSV: row " + std::to_string(row_index + 1) + " has " +
                        std::to_string(row.size()) + " cells, expected " + std::to_string(k));
    for (std::size_t c = 0; c < k; ++c) {
      if (row[c] == "0")
        cells.push_back(0);
      else if (row[c] == "1")
        cells.push_back(1);
      else
        throw FormatError("labels CSV: non-binary cell \"" + row[c] + "\" at row " +
                          std::to_string(row_index + 1) + ", column " + std::to_string(c + 1));
    }
    ++row_index;
  }
  file.labels = LabelMatrix(row_index, k);
  std::copy(cells.begin(), cells.end(), file.labels.values().begin());
  return file;
}

}  // namespace mudas
