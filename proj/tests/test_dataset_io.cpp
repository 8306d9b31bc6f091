#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "lmcca/classify.hpp"
#include "lmcca/dataset_io.hpp"
#include "support/fixtures.hpp"
#include "support/tempdir.hpp"

namespace fs = std::filesystem;
using fixture::TempDir;
using lmcca::Bytes;
using lmcca::Matrix;

namespace {

void write_bytes(const fs::path& p, const Bytes& b) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

void put_be32(Bytes& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

}  // namespace

TEST(Rng, StandardEngineValues) {
  lmcca::Rng rng(5489);
  EXPECT_EQ(rng.next(), 14514284786278117030ULL);
  for (int i = 1; i < 9999; ++i) rng.next();
  EXPECT_EQ(rng.next(), 9981545732273789042ULL);
}

TEST(Rng, BoundedAndUniformRanges) {
  lmcca::Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7U);
    ++counts[v];
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_TRUE(std::isfinite(rng.normal()));
  }
  for (int c : counts) EXPECT_GT(c, 800);
  EXPECT_THROW(rng.below(0), lmcca::InvalidInput);
}

TEST(Idx, HandBuiltImages) {
  TempDir dir;
  Bytes b;
  put_be32(b, 0x00000803);
  put_be32(b, 2);
  put_be32(b, 2);
  put_be32(b, 2);
  for (int v : {0, 51, 102, 153, 204, 255, 0, 255}) b.push_back(static_cast<std::uint8_t>(v));
  write_bytes(dir.file("img"), b);
  const auto images = lmcca::load_idx_images(dir.file("img"));
  ASSERT_EQ(images.size(), 2U);
  EXPECT_EQ(images[0].height(), 2);
  EXPECT_EQ(images[0].width(), 2);
  EXPECT_DOUBLE_EQ(images[0].at(0, 1), 0.2);
  EXPECT_DOUBLE_EQ(images[0].at(1, 1), 0.6);
  EXPECT_DOUBLE_EQ(images[1].at(0, 0), 0.8);
  EXPECT_DOUBLE_EQ(images[1].at(1, 1), 1.0);
}

TEST(Idx, HandBuiltLabels) {
  TempDir dir;
  Bytes b;
  put_be32(b, 0x00000801);
  put_be32(b, 3);
  for (int v : {7, 0, 9}) b.push_back(static_cast<std::uint8_t>(v));
  write_bytes(dir.file("lab"), b);
  EXPECT_EQ(lmcca::load_idx_labels(dir.file("lab")), (std::vector<int>{7, 0, 9}));
}

TEST(Idx, BadMagicTruncationAndMissing) {
  TempDir dir;
  Bytes b;
  put_be32(b, 0x00000123);
  put_be32(b, 1);
  put_be32(b, 1);
  put_be32(b, 1);
  b.push_back(0);
  write_bytes(dir.file("bad"), b);
  EXPECT_THROW(lmcca::load_idx_images(dir.file("bad")), lmcca::FormatError);
  EXPECT_THROW(lmcca::load_idx_labels(dir.file("bad")), lmcca::FormatError);

  Bytes t;
  put_be32(t, 0x00000803);
  put_be32(t, 2);
  put_be32(t, 2);
  put_be32(t, 2);
  t.push_back(1);
  write_bytes(dir.file("short"), t);
  EXPECT_THROW(lmcca::load_idx_images(dir.file("short")), lmcca::FormatError);
  write_bytes(dir.file("tiny"), Bytes{0, 0});
  EXPECT_THROW(lmcca::load_idx_images(dir.file("tiny")), lmcca::FormatError);
  EXPECT_THROW(lmcca::load_idx_images(dir.file("absent")), lmcca::IoError);
}

TEST(Mvfs, RoundTripIsBitExact) {
  fixture::Gen gen(50);
  const auto ds = gen.dataset({3, 1, 5}, 4, 17);
  const auto back = lmcca::read_feature_set(lmcca::write_feature_set(ds));
  ASSERT_EQ(back.view_count(), 3U);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(back.view(t).data(), ds.view(t).data());
  EXPECT_EQ(back.labels(), ds.labels());
  EXPECT_EQ(back.class_count(), 4);
  EXPECT_EQ(lmcca::write_feature_set(back), lmcca::write_feature_set(ds));

  TempDir dir;
  lmcca::save_feature_set(dir.file("f.mvfs"), ds);
  EXPECT_EQ(lmcca::write_feature_set(lmcca::load_feature_set(dir.file("f.mvfs"))),
            lmcca::write_feature_set(ds));
}

TEST(Mvfs, HeaderLayout) {
  fixture::Gen gen(51);
  const auto ds = gen.dataset({2, 3}, 2, 4);
  const Bytes b = lmcca::write_feature_set(ds);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "MVFS");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5], 2);  // P, little-endian
  EXPECT_EQ(b.size(), 4 + 1 + 4 + 2 * 4 + 4 + 4 + 4 * 4 + 4 * 5 * 8U);
}

TEST(Mvfs, CorruptInputs) {
  fixture::Gen gen(52);
  const auto ds = gen.dataset({2, 2}, 2, 5);
  const Bytes good = lmcca::write_feature_set(ds);

  Bytes magic = good;
  magic[0] = 'X';
  EXPECT_THROW(lmcca::read_feature_set(magic), lmcca::FormatError);

  Bytes truncated(good.begin(), good.end() - 3);
  EXPECT_THROW(lmcca::read_feature_set(truncated), lmcca::FormatError);

  Bytes extra = good;
  extra.push_back(0);
  EXPECT_THROW(lmcca::read_feature_set(extra), lmcca::FormatError);

  // Header with N = 0.
  Bytes empty(good.begin(), good.begin() + 4 + 1 + 4 + 8);
  for (int i = 0; i < 4; ++i) empty.push_back(0);
  for (int v : {2, 0, 0, 0}) empty.push_back(static_cast<std::uint8_t>(v));
  EXPECT_THROW(lmcca::read_feature_set(empty), lmcca::FormatError);

  // Label 7 with c = 2; labels start after magic, version, P, dims, N, c.
  Bytes label = good;
  label[4 + 1 + 4 + 8 + 4 + 4] = 7;
  EXPECT_THROW(lmcca::read_feature_set(label), lmcca::FormatError);

  // A class left empty by the labels.
  Bytes missing_class = good;
  for (int i = 0; i < 5; ++i) missing_class[4 + 1 + 4 + 8 + 4 + 4 + 4 * static_cast<std::size_t>(i)] = 0;
  EXPECT_THROW(lmcca::read_feature_set(missing_class), lmcca::FormatError);

  Bytes version = good;
  version[4] = 9;
  EXPECT_THROW(lmcca::read_feature_set(version), lmcca::FormatError);

  EXPECT_THROW(lmcca::load_feature_set("/nonexistent/dir/f.mvfs"), lmcca::IoError);
}

TEST(Mvfm, RoundTrip) {
  fixture::Gen gen(53);
  const auto ds = gen.dataset({3, 2, 4}, 3, 30);
  const auto model = lmcca::fit(ds, lmcca::Variant::kMcca);
  const auto back = lmcca::read_model(lmcca::write_model(model));
  EXPECT_EQ(back.variant, model.variant);
  EXPECT_EQ(back.prior, model.prior);
  EXPECT_EQ(back.q, 9);
  EXPECT_EQ(back.eigenvalues, model.eigenvalues);
  EXPECT_EQ(back.stacked(), model.stacked());
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(back.view_means[t], model.view_means[t]);

  Bytes bad = lmcca::write_model(model);
  bad[5] = 2;  // gcca tag with P = 3
  EXPECT_THROW(lmcca::read_model(bad), lmcca::FormatError);
  Bytes cut = lmcca::write_model(model);
  cut.pop_back();
  EXPECT_THROW(lmcca::read_model(cut), lmcca::FormatError);
}

TEST(PerClassSubset, FirstKInFileOrder) {
  const std::vector<int> labels{1, 0, 1, 1, 0, 2, 0, 0};
  EXPECT_EQ(lmcca::per_class_subset(labels, 2), (std::vector<std::size_t>{0, 1, 2, 4, 5}));
  EXPECT_EQ(lmcca::per_class_subset(labels, 9).size(), labels.size());
  EXPECT_THROW(lmcca::per_class_subset(labels, 0), lmcca::InvalidInput);
}

TEST(PerClassSubset, SeededDrawKeepsCounts) {
  std::vector<int> labels;
  for (int i = 0; i < 200; ++i) labels.push_back(i % 5);
  const auto a = lmcca::per_class_subset(labels, 10, 3);
  const auto b = lmcca::per_class_subset(labels, 10, 3);
  const auto c = lmcca::per_class_subset(labels, 10, 4);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a, lmcca::per_class_subset(labels, 10));
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  std::vector<int> counts(5, 0);
  for (auto i : a) ++counts[static_cast<std::size_t>(labels[i])];
  EXPECT_EQ(counts, std::vector<int>(5, 10));
}

TEST(Split, ExactHalves) {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c) labels.insert(labels.end(), 10, c);
  const auto s = lmcca::stratified_split(labels, 0.5, 1);
  std::vector<int> train_count(3, 0);
  std::vector<int> test_count(3, 0);
  for (auto i : s.train) ++train_count[static_cast<std::size_t>(labels[i])];
  for (auto i : s.test) ++test_count[static_cast<std::size_t>(labels[i])];
  EXPECT_EQ(train_count, (std::vector<int>{5, 5, 5}));
  EXPECT_EQ(test_count, (std::vector<int>{5, 5, 5}));

  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 30U);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
}

TEST(Split, DeterministicAndSeedSensitive) {
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i % 4);
  const auto a = lmcca::stratified_split(labels, 0.5, 9);
  const auto b = lmcca::stratified_split(labels, 0.5, 9);
  const auto c = lmcca::stratified_split(labels, 0.5, 10);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, c.train);
}

TEST(Split, Contracts) {
  const std::vector<int> singleton{0, 0, 1};
  EXPECT_THROW(lmcca::stratified_split(singleton, 0.5, 0), lmcca::InvalidInput);
  const std::vector<int> ok{0, 0, 1, 1};
  EXPECT_THROW(lmcca::stratified_split(ok, 0.0, 0), lmcca::InvalidInput);
  EXPECT_THROW(lmcca::stratified_split(ok, 1.0, 0), lmcca::InvalidInput);
  const auto s = lmcca::stratified_split(ok, 0.99, 0);
  EXPECT_EQ(s.train.size(), 2U);
  EXPECT_EQ(s.test.size(), 2U);
}

TEST(SplitManifest, ThreeWayPartitionAndRoundTrip) {
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(i % 3);
  auto m = lmcca::make_split_manifest(labels, 0.5, 0.2, 4);
  m.views = {0, 2};
  EXPECT_EQ(m.test.size(), 30U);
  EXPECT_EQ(m.validation.size(), 6U);
  EXPECT_EQ(m.train.size(), 24U);
  std::set<std::size_t> all(m.train.begin(), m.train.end());
  all.insert(m.validation.begin(), m.validation.end());
  all.insert(m.test.begin(), m.test.end());
  EXPECT_EQ(all.size(), 60U);

  const std::string text = lmcca::format_split_manifest(m);
  EXPECT_NE(text.find("mt19937_64"), std::string::npos);
  const auto back = lmcca::parse_split_manifest(text);
  EXPECT_EQ(back.train, m.train);
  EXPECT_EQ(back.validation, m.validation);
  EXPECT_EQ(back.test, m.test);
  EXPECT_EQ(back.views, m.views);
  EXPECT_EQ(back.seed, 4U);
  EXPECT_EQ(back.validation_fraction, 0.2);

  EXPECT_THROW(lmcca::parse_split_manifest("samples=3\ntrain=0 1\ntest=5\n"), lmcca::FormatError);
  EXPECT_THROW(lmcca::parse_split_manifest("samples=3\ntrain=0\n"), lmcca::FormatError);
  EXPECT_THROW(lmcca::parse_split_manifest("samples=3\nwho=1\ntrain=0\ntest=1\n"), lmcca::FormatError);
}

TEST(Synth, DeterministicAndShaped) {
  lmcca::SynthSpec spec;
  spec.seed = 77;
  const auto a = lmcca::synth_multiview(spec);
  const auto b = lmcca::synth_multiview(spec);
  EXPECT_EQ(lmcca::write_feature_set(a), lmcca::write_feature_set(b));
  EXPECT_EQ(a.view_count(), 3U);
  EXPECT_EQ(a.samples(), 6 * 20);
  EXPECT_EQ(a.view(2).dim(), 12);
  spec.seed = 78;
  EXPECT_NE(lmcca::write_feature_set(lmcca::synth_multiview(spec)), lmcca::write_feature_set(a));
}

TEST(Synth, NoWithinClassVariation) {
  lmcca::SynthSpec spec;
  spec.noise = 0.0;
  spec.shared_strength = 0.0;
  spec.per_class = 1;
  const auto ds = lmcca::synth_multiview(spec);
  for (const auto& v : ds.views()) {
    EXPECT_EQ(lmcca::within_class_scatter(v, ds.labels(), ds.class_count()).matrix(),
              Matrix::Zero(v.dim(), v.dim()));
  }
}

TEST(Synth, WellSeparatedClassesAreEasy) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    lmcca::SynthSpec spec;
    spec.class_sep = 10.0;
    spec.noise = 0.1;
    spec.shared_strength = 0.1;
    spec.seed = seed;
    const auto ds = lmcca::synth_multiview(spec);
    const auto split = lmcca::stratified_split(ds.labels(), 0.5, seed);
    const auto train = ds.select(split.train);
    const auto test = ds.select(split.test);
    for (std::size_t t = 0; t < ds.view_count(); ++t) {
      const auto pred = lmcca::nn_classify_raw(train.view(t).data(), train.labels(), test.view(t).data());
      EXPECT_GT(lmcca::accuracy(pred, test.labels()), 0.95) << "seed " << seed << " view " << t;
    }
  }
}
