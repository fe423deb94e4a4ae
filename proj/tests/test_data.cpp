#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mudas/adapt.hpp"
#include "mudas/data.hpp"
#include "mudas/metrics.hpp"
#include "mudas/rng.hpp"

using namespace mudas;

namespace {

std::string temp_path(const std::string& name) {
  static const std::string dir = [] {
    auto d = std::filesystem::temp_directory_path() / "mudas_data_tests";
    std::filesystem::create_directories(d);
    return d.string();
  }();
  return dir + "/" + name;
}

EmbeddingBatch random_batch(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  EmbeddingBatch b;
  b.features = MatF(rows, dim);
  b.domain = Domain::Target;
  b.aug = AugTag::Weak;
  Rng rng(seed);
  for (auto& v : b.features.values()) v = static_cast<float>(rng.uniform(-2.0, 2.0));
  return b;
}

}  // namespace

TEST(Emb1, RoundTripIsBitExact) {
  const EmbeddingBatch b = random_batch(13, 7, 1);
  const std::string path = temp_path("roundtrip.emb1");
  save_embeddings(b, path);
  const EmbeddingBatch loaded = load_embeddings(path);
  EXPECT_TRUE(loaded.features == b.features);
  EXPECT_EQ(loaded.domain, b.domain);
  EXPECT_EQ(loaded.aug, b.aug);
}

TEST(Emb1, WrongMagicNamesExpectedFormat) {
  const std::string path = temp_path("badmagic.emb1");
  std::ofstream os(path, std::ios::binary);
  os << "NOPE" << std::string(32, '\0');
  os.close();
  try {
    load_embeddings(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("EMB1"), std::string::npos);
  }
}

TEST(Emb1, TruncatedPayloadDetected) {
  const EmbeddingBatch b = random_batch(10, 5, 2);
  const std::string path = temp_path("truncated.emb1");
  save_embeddings(b, path);
  const auto full = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, full - 8);
  EXPECT_THROW(load_embeddings(path), FormatError);
}

TEST(Emb1, TrailingBytesDetected) {
  const EmbeddingBatch b = random_batch(4, 3, 3);
  const std::string path = temp_path("trailing.emb1");
  save_embeddings(b, path);
  std::ofstream os(path, std::ios::binary | std::ios::app);
  os << "x";
  os.close();
  EXPECT_THROW(load_embeddings(path), FormatError);
}

TEST(Dsc1, RoundTrip) {
  const std::vector<double> scores = {0.5, 0.25, 0.125};  // exactly representable in f32
  const std::string path = temp_path("scores.dsc1");
  save_dscores(scores, path);
  EXPECT_EQ(load_dscores(path), scores);
}

TEST(Spg1, RoundTrip) {
  Spectrogram s;
  s.grid = MatF(6, 4);
  s.frame_rate = 25.0f;
  Rng rng(4);
  for (auto& v : s.grid.values()) v = static_cast<float>(rng.uniform(0.0, 1.0));
  const std::string path = temp_path("spec.spg1");
  save_spectrogram(s, path);
  const Spectrogram loaded = load_spectrogram(path);
  EXPECT_TRUE(loaded.grid == s.grid);
  EXPECT_EQ(loaded.frame_rate, s.frame_rate);
}

TEST(LabelsCsv, ParsesMinimalFile) {
  const std::string path = temp_path("labels_min.csv");
  std::ofstream(path) << "a,b\n1,0\n";
  const LabelFile f = load_labels(path);
  ASSERT_EQ(f.class_names.size(), 2u);
  EXPECT_EQ(f.class_names[0], "a");
  EXPECT_EQ(f.class_names[1], "b");
  ASSERT_EQ(f.labels.rows(), 1u);
  EXPECT_EQ(f.labels(0, 0), 1);
  EXPECT_EQ(f.labels(0, 1), 0);
}

TEST(LabelsCsv, NonBinaryCellReportsPosition) {
  const std::string path = temp_path("labels_bad.csv");
  std::ofstream(path) << "a,b\n1,2\n";
  try {
    load_labels(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 1"), std::string::npos);
    EXPECT_NE(msg.find("column 2"), std::string::npos);
  }
}

TEST(LabelsCsv, EmptyBodyIsValid) {
  const std::string path = temp_path("labels_empty.csv");
  std::ofstream(path) << "a,b,c\n";
  const LabelFile f = load_labels(path);
  EXPECT_EQ(f.labels.rows(), 0u);
  EXPECT_EQ(f.labels.cols(), 3u);
}

TEST(LabelsCsv, RoundTrip) {
  LabelFile f;
  f.class_names = {"one", "two", "three"};
  f.labels = LabelMatrix(4, 3);
  Rng rng(5);
  for (auto& v : f.labels.values()) v = rng.bernoulli(0.5) ? 1 : 0;
  const std::string path = temp_path("labels_rt.csv");
  save_labels(f, path);
  const LabelFile loaded = load_labels(path);
  EXPECT_EQ(loaded.class_names, f.class_names);
  EXPECT_TRUE(loaded.labels == f.labels);
}

TEST(Synthetic, FixedSeedRegeneratesIdentically) {
  SyntheticSpec spec;
  spec.dims = 16;
  spec.num_classes = 3;
  spec.samples_source = 40;
  spec.samples_target = 40;
  const auto [s1, t1] = gen_synthetic(spec, 7);
  const auto [s2, t2] = gen_synthetic(spec, 7);
  EXPECT_TRUE(s1.embeddings == s2.embeddings);
  EXPECT_TRUE(s1.labels == s2.labels);
  EXPECT_TRUE(t1.embeddings == t2.embeddings);
  EXPECT_TRUE(t1.labels == t2.labels);
}

TEST(Synthetic, ZeroPriorGivesPureNoise) {
  SyntheticSpec spec;
  spec.dims = 8;
  spec.num_classes = 2;
  spec.label_prior = 0.0;
  spec.samples_source = 20;
  spec.samples_target = 20;
  const auto [source, target] = gen_synthetic(spec, 1);
  for (auto v : source.labels.values()) EXPECT_EQ(v, 0);
  for (auto v : target.labels.values()) EXPECT_EQ(v, 0);
  // still normalized noise, not zeros
  double norm = 0.0;
  for (std::size_t c = 0; c < spec.dims; ++c)
    norm += static_cast<double>(source.embeddings(0, c)) * source.embeddings(0, c);
  EXPECT_NEAR(norm, 1.0, 1e-5);
}

TEST(Synthetic, ZeroShiftMatchesSourceDistribution) {
  SyntheticSpec spec;
  spec.dims = 24;
  spec.num_classes = 3;
  spec.shift_rotation = 0.0;
  spec.shift_translation = 0.0;
  spec.samples_source = 400;
  spec.samples_target = 400;
  const auto [source, target] = gen_synthetic(spec, 11);

  // two-sample mean check per dimension at a fixed fixture seed
  const std::size_t n = spec.samples_source;
  for (std::size_t c = 0; c < spec.dims; ++c) {
    double ms = 0.0, mt = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      ms += source.embeddings(r, c);
      mt += target.embeddings(r, c);
    }
    ms /= n;
    mt /= n;
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      var += (source.embeddings(r, c) - ms) * (source.embeddings(r, c) - ms);
      var += (target.embeddings(r, c) - mt) * (target.embeddings(r, c) - mt);
    }
    const double sd = std::sqrt(var / (2.0 * n - 2.0));
    EXPECT_LT(std::abs(ms - mt), 3.0 * sd / std::sqrt(static_cast<double>(n)))
        << "dimension " << c;
  }
}

TEST(Synthetic, InvalidSpecRejected) {
  SyntheticSpec spec;
  spec.samples_source = 0;
  EXPECT_THROW(gen_synthetic(spec, 1), ConfigError);
  spec = SyntheticSpec{};
  spec.noise_sigma = 0.0;
  EXPECT_THROW(gen_synthetic(spec, 1), ConfigError);
}

// The default-style shift must hurt a source-trained model on the target:
// that gap is what adaptation is supposed to claw back. Checked on a
// scaled-down spec, seed-averaged.
TEST(Synthetic, ShiftDegradesSourceModelOnTarget) {
  double gap_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticSpec spec;
    spec.dims = 32;
    spec.num_classes = 4;
    spec.samples_source = 200;
    spec.samples_target = 200;
    const auto [source, target] = gen_synthetic(spec, seed);

    ClassifierConfig mc;
    mc.input_dim = spec.dims;
    mc.hidden_dims = {32};
    mc.num_classes = spec.num_classes;
    mc.seed = seed;
    AdaptConfig tc;
    tc.epochs = 20;
    tc.batch_source = 32;
    tc.seed = seed;

    const AdaptResult trained = train_supervised(source, tc, mc);
    const double on_source =
        micro_auprc(source.labels, predict(trained.params, source.embeddings));
    const double on_target =
        micro_auprc(target.labels, predict(trained.params, target.embeddings));
    gap_sum += on_source - on_target;
  }
  EXPECT_GT(gap_sum / 5.0, 0.0);
}
