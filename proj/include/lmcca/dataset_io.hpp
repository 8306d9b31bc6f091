#pragma once

// Ingestion and persistence: IDX image/label files, the MVFS feature-set
// format, the MVFM model format, stratified splits and synthetic multiview
// data. Binary layouts are documented in docs/formats.md.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lmcca/errors.hpp"
#include "lmcca/features.hpp"
#include "lmcca/fusion.hpp"

namespace lmcca {

using Bytes = std::vector<std::uint8_t>;

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// Seeded generator with a fully specified output sequence: raw draws come
/// from std::mt19937_64 (bit-exact by the C++ standard), bounded integers
/// use rejection sampling on the raw 64-bit word, uniforms take the top
/// 53 bits, and normals use the cosine branch of Box-Muller. None of the
/// implementation-defined std distributions are involved.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw InvalidInput("Rng::below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline constexpr std::string_view kRngDescription =
    "mt19937_64; bounded ints by rejection on raw 64-bit words; Fisher-Yates from the back";

// ---------------------------------------------------------------------------
// Byte helpers
// ---------------------------------------------------------------------------

namespace detail {

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

class Writer {
 public:
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, std::string_view what) : data_(data), what_(what) {}

  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw FormatError(std::string(what_) + ": truncated");
  }
  void expect_magic(std::string_view magic) {
    need(magic.size());
    for (std::size_t i = 0; i < magic.size(); ++i) {
      if (data_[pos_ + i] != static_cast<std::uint8_t>(magic[i])) {
        throw FormatError(std::string(what_) + ": bad magic");
      }
    }
    pos_ += magic.size();
  }
  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t{data_[pos_ + static_cast<std::size_t>(i)]} << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) throw FormatError(std::string(what_) + ": trailing bytes");
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string_view what_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// IDX
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Big-endian IDX3 unsigned-byte images; pixels scaled to [0, 1].
inline std::vector<GrayImage> load_idx_images(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint8_t header[16];
  if (!in.read(reinterpret_cast<char*>(header), 16)) throw FormatError("IDX images: truncated header");
  if (detail::be32(header) != kIdxImageMagic) throw FormatError("IDX images: bad magic");
  const std::uint32_t count = detail::be32(header + 4);
  const std::uint32_t rows = detail::be32(header + 8);
  const std::uint32_t cols = detail::be32(header + 12);
  if (rows == 0 || cols == 0 || rows > 1u << 15 || cols > 1u << 15) {
    throw FormatError("IDX images: bad dimensions");
  }
  const std::uint64_t per_image = std::uint64_t{rows} * cols;
  const std::uint64_t expected = per_image * count;
  const Bytes payload(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
  if (payload.size() != expected) {
    throw FormatError("IDX images: payload has " + std::to_string(payload.size()) +
                      " bytes, expected " + std::to_string(expected));
  }
  std::vector<GrayImage> images;
  images.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    std::vector<double> px(per_image);
    for (std::uint64_t i = 0; i < per_image; ++i) px[i] = payload[k * per_image + i] / 255.0;
    images.emplace_back(static_cast<int>(rows), static_cast<int>(cols), std::move(px));
  }
  return images;
}

inline std::vector<int> load_idx_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::uint8_t header[8];
  if (!in.read(reinterpret_cast<char*>(header), 8)) throw FormatError("IDX labels: truncated header");
  if (detail::be32(header) != kIdxLabelMagic) throw FormatError("IDX labels: bad magic");
  const std::uint32_t count = detail::be32(header + 4);
  const Bytes payload(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
  if (payload.size() != count) {
    throw FormatError("IDX labels: payload has " + std::to_string(payload.size()) +
                      " bytes, expected " + std::to_string(count));
  }
  return {payload.begin(), payload.end()};
}

// ---------------------------------------------------------------------------
// MVFS feature sets
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kMvfsVersion = 1;

/// "MVFS", u8 version, u32 P, u32 dims[P], u32 N, u32 c, u32 labels[N],
/// then per view an N x m_t row-major f64 table (one row per sample).
/// Integers and reals are little-endian.
inline Bytes write_feature_set(const LabeledMultiviewDataset& ds) {
  detail::Writer w;
  w.bytes("MVFS");
  w.u8(kMvfsVersion);
  w.u32(static_cast<std::uint32_t>(ds.view_count()));
  for (const auto& v : ds.views()) w.u32(static_cast<std::uint32_t>(v.dim()));
  w.u32(static_cast<std::uint32_t>(ds.samples()));
  w.u32(static_cast<std::uint32_t>(ds.class_count()));
  for (int y : ds.labels()) w.u32(static_cast<std::uint32_t>(y));
  for (const auto& v : ds.views()) {
    for (Eigen::Index i = 0; i < v.samples(); ++i) {
      for (Eigen::Index r = 0; r < v.dim(); ++r) w.f64(v.data()(r, i));
    }
  }
  return w.take();
}

inline LabeledMultiviewDataset read_feature_set(std::span<const std::uint8_t> bytes) {
  detail::Reader r(bytes, "MVFS");
  r.expect_magic("MVFS");
  if (const auto version = r.u8(); version != kMvfsVersion) {
    throw FormatError("MVFS: unsupported version " + std::to_string(version));
  }
  const std::uint32_t p = r.u32();
  if (p < 2 || p > 4096) throw FormatError("MVFS: view count must be in [2, 4096]");
  std::vector<std::uint32_t> dims(p);
  std::uint64_t row_width = 0;
  for (auto& d : dims) {
    d = r.u32();
    if (d == 0) throw FormatError("MVFS: zero-dimensional view");
    row_width += d;
  }
  const std::uint32_t n = r.u32();
  const std::uint32_t c = r.u32();
  if (n == 0) throw FormatError("MVFS: no samples");
  if (c == 0 || c > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
    throw FormatError("MVFS: bad class count");
  }
  // Header is complete; check the declared payload size before reading it.
  const std::uint64_t expected = std::uint64_t{n} * 4 + std::uint64_t{n} * row_width * 8;
  if (r.remaining() != expected) {
    throw FormatError("MVFS: payload has " + std::to_string(r.remaining()) + " bytes, header declares " +
                      std::to_string(expected));
  }
  std::vector<int> labels(n);
  for (auto& y : labels) {
    const std::uint32_t raw = r.u32();
    if (raw >= c) throw FormatError("MVFS: label " + std::to_string(raw) + " outside [0, c)");
    y = static_cast<int>(raw);
  }
  std::vector<ViewMatrix> views;
  for (std::uint32_t d : dims) {
    Matrix m(d, n);
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t k = 0; k < d; ++k) {
        const double v = r.f64();
        if (!std::isfinite(v)) throw FormatError("MVFS: non-finite value");
        m(k, i) = v;
      }
    }
    views.emplace_back(std::move(m));
  }
  r.expect_end();
  try {
    return {std::move(views), std::move(labels), static_cast<int>(c)};
  } catch (const InvalidInput& e) {
    throw FormatError(std::string("MVFS: ") + e.what());
  }
}

inline void save_feature_set(const std::filesystem::path& path, const LabeledMultiviewDataset& ds) {
  detail::write_file(path, write_feature_set(ds));
}

inline LabeledMultiviewDataset load_feature_set(const std::filesystem::path& path) {
  return read_feature_set(detail::read_file(path));
}

// ---------------------------------------------------------------------------
// MVFM models
// ---------------------------------------------------------------------------

inline constexpr std::uint8_t kMvfmVersion = 1;

/// "MVFM", u8 version, u8 variant, u8 prior, u32 P, u32 Q, u32 d,
/// u32 dims[P], f64 eigenvalues[d], then per view f64 mean[m_t] followed
/// by the m_t x d block row-major. Little-endian.
inline Bytes write_model(const FusionModel& model) {
  detail::Writer w;
  w.bytes("MVFM");
  w.u8(kMvfmVersion);
  w.u8(static_cast<std::uint8_t>(model.variant));
  w.u8(static_cast<std::uint8_t>(model.prior));
  w.u32(static_cast<std::uint32_t>(model.view_count()));
  w.u32(static_cast<std::uint32_t>(model.q));
  w.u32(static_cast<std::uint32_t>(model.d()));
  for (const auto& b : model.blocks) w.u32(static_cast<std::uint32_t>(b.rows()));
  for (Eigen::Index j = 0; j < model.d(); ++j) w.f64(model.eigenvalues(j));
  for (std::size_t t = 0; t < model.view_count(); ++t) {
    const Matrix& b = model.blocks[t];
    for (Eigen::Index i = 0; i < b.rows(); ++i) w.f64(model.view_means[t](i));
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.cols(); ++j) w.f64(b(i, j));
    }
  }
  return w.take();
}

inline FusionModel read_model(std::span<const std::uint8_t> bytes) {
  detail::Reader r(bytes, "MVFM");
  r.expect_magic("MVFM");
  if (const auto version = r.u8(); version != kMvfmVersion) {
    throw FormatError("MVFM: unsupported version " + std::to_string(version));
  }
  FusionModel model;
  const std::uint8_t variant = r.u8();
  const std::uint8_t prior = r.u8();
  if (variant > 3) throw FormatError("MVFM: bad variant tag");
  if (prior > 1) throw FormatError("MVFM: bad prior tag");
  model.variant = static_cast<Variant>(variant);
  model.prior = static_cast<PriorMode>(prior);
  const std::uint32_t p = r.u32();
  const std::uint32_t q = r.u32();
  const std::uint32_t d = r.u32();
  if (p < 2 || p > 4096) throw FormatError("MVFM: view count must be in [2, 4096]");
  if (is_pairwise(model.variant) && p != 2) throw FormatError("MVFM: pairwise variant with P != 2");
  std::vector<std::uint32_t> dims(p);
  std::uint64_t sum = 0;
  for (auto& m : dims) {
    m = r.u32();
    if (m == 0) throw FormatError("MVFM: zero-dimensional view");
    sum += m;
  }
  if (sum != q) throw FormatError("MVFM: view dims do not sum to Q");
  if (d == 0 || d > q) throw FormatError("MVFM: d must be in [1, Q]");
  const std::uint64_t expected = (std::uint64_t{d} + sum + sum * d) * 8;
  if (r.remaining() != expected) throw FormatError("MVFM: payload size does not match header");
  model.q = q;
  model.eigenvalues.resize(d);
  for (std::uint32_t j = 0; j < d; ++j) model.eigenvalues(j) = r.f64();
  for (std::uint32_t m : dims) {
    Vector mean(m);
    for (std::uint32_t i = 0; i < m; ++i) mean(i) = r.f64();
    Matrix b(m, d);
    for (std::uint32_t i = 0; i < m; ++i) {
      for (std::uint32_t j = 0; j < d; ++j) b(i, j) = r.f64();
    }
    if (!mean.allFinite() || !b.allFinite()) throw FormatError("MVFM: non-finite value");
    model.view_means.push_back(std::move(mean));
    model.blocks.push_back(std::move(b));
  }
  if (!model.eigenvalues.allFinite()) throw FormatError("MVFM: non-finite eigenvalue");
  return model;
}

inline void save_model(const std::filesystem::path& path, const FusionModel& model) {
  detail::write_file(path, write_model(model));
}

inline FusionModel load_model(const std::filesystem::path& path) {
  return read_model(detail::read_file(path));
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per class (ascending class id), the member indices in ascending order are
/// shuffled with Fisher-Yates and the first round(fraction * l) are used for
/// training, clamped so both sides keep at least one sample. Both index
/// lists are returned sorted.
inline Split stratified_split(std::span<const int> labels, double train_fraction,
                              std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidInput("stratified_split: train_fraction must be in (0, 1)");
  }
  int max_label = -1;
  for (int y : labels) {
    if (y < 0) throw InvalidInput("stratified_split: negative label");
    max_label = std::max(max_label, y);
  }
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  Rng rng(seed);
  Split split;
  for (std::size_t cls = 0; cls < members.size(); ++cls) {
    auto& idx = members[cls];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw InvalidInput("stratified_split: class " + std::to_string(cls) +
                         " has fewer than 2 samples");
    }
    for (std::size_t i = idx.size() - 1; i > 0; --i) {
      std::swap(idx[i], idx[rng.below(i + 1)]);
    }
    const auto l = static_cast<double>(idx.size());
    const auto n_train = static_cast<std::size_t>(
        std::clamp(std::round(train_fraction * l), 1.0, l - 1.0));
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

/// Train/validation/test partition of a feature set, as written next to a
/// fitted model. The validation part is carved out of the training part
/// with seed + 1 so a single seed drives both draws.
/// Up to k samples of each class, in file order. With a seed the members
/// of each class are shuffled first (same Fisher-Yates as the splits), so a
/// different seed draws a different subset. Returned indices are sorted.
inline std::vector<std::size_t> per_class_subset(std::span<const int> labels, int k,
                                                 std::optional<std::uint64_t> seed = std::nullopt) {
  if (k < 1) throw InvalidInput("per_class_subset: k must be >= 1");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  std::vector<std::size_t> kept;
  std::optional<Rng> rng;
  if (seed) rng.emplace(*seed);
  for (auto& [label, idx] : members) {
    if (rng) {
      for (std::size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng->below(i + 1)]);
    }
    const auto take = std::min(idx.size(), static_cast<std::size_t>(k));
    kept.insert(kept.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

struct SplitManifest {
  std::uint64_t seed = 0;
  double train_fraction = 0.5;
  double validation_fraction = 0.0;
  std::size_t samples = 0;
  std::vector<std::size_t> train;  // the samples the model is fitted on
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::vector<std::size_t> views;  // view subset the model uses; empty means all
};

inline SplitManifest make_split_manifest(std::span<const int> labels, double train_fraction,
                                         double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw InvalidInput("validation_fraction must be in [0, 1)");
  }
  SplitManifest m;
  m.seed = seed;
  m.train_fraction = train_fraction;
  m.validation_fraction = validation_fraction;
  m.samples = labels.size();
  Split outer = stratified_split(labels, train_fraction, seed);
  m.test = std::move(outer.test);
  if (validation_fraction == 0.0) {
    m.train = std::move(outer.train);
    return m;
  }
  std::vector<int> sub(outer.train.size());
  for (std::size_t i = 0; i < sub.size(); ++i) sub[i] = labels[outer.train[i]];
  const Split inner = stratified_split(sub, 1.0 - validation_fraction, seed + 1);
  for (std::size_t i : inner.train) m.train.push_back(outer.train[i]);
  for (std::size_t i : inner.test) m.validation.push_back(outer.train[i]);
  return m;
}

inline std::string format_split_manifest(const SplitManifest& m) {
  std::ostringstream os;
  os << "# lmcca split manifest v1\n# rng: " << kRngDescription << '\n';
  auto shortest = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  os << "seed=" << m.seed << "\ntrain_fraction=" << shortest(m.train_fraction)
     << "\nvalidation_fraction=" << shortest(m.validation_fraction) << "\nsamples=" << m.samples << '\n';
  auto list = [&](const char* key, const std::vector<std::size_t>& idx) {
    os << key << '=';
    for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? " " : "") << idx[i];
    os << '\n';
  };
  list("train", m.train);
  list("validation", m.validation);
  list("test", m.test);
  list("views", m.views);
  return os.str();
}

inline SplitManifest parse_split_manifest(const std::string& text) {
  SplitManifest m;
  std::istringstream in(text);
  std::string line;
  bool seen_train = false;
  bool seen_test = false;
  auto indices = [&](const std::string& v) {
    std::vector<std::size_t> out;
    std::istringstream vs(v);
    std::string tok;
    while (vs >> tok) {
      std::size_t used = 0;
      unsigned long long x = 0;
      try {
        x = std::stoull(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || x >= m.samples) throw FormatError("split manifest: bad index '" + tok + "'");
      out.push_back(static_cast<std::size_t>(x));
    }
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("split manifest: expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "seed") {
        m.seed = std::stoull(value);
      } else if (key == "train_fraction") {
        m.train_fraction = std::stod(value);
      } else if (key == "validation_fraction") {
        m.validation_fraction = std::stod(value);
      } else if (key == "samples") {
        m.samples = static_cast<std::size_t>(std::stoull(value));
      } else if (key == "train") {
        m.train = indices(value);
        seen_train = true;
      } else if (key == "validation") {
        m.validation = indices(value);
      } else if (key == "test") {
        m.test = indices(value);
        seen_test = true;
      } else if (key == "views") {
        std::istringstream vs(value);
        std::size_t v = 0;
        while (vs >> v) m.views.push_back(v);
        if (!vs.eof()) throw FormatError("split manifest: bad view list");
      } else {
        throw FormatError("split manifest: unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw FormatError("split manifest: bad value for '" + key + "'");
    } catch (const std::out_of_range&) {
      throw FormatError("split manifest: value out of range for '" + key + "'");
    }
  }
  if (!seen_train || !seen_test || m.train.empty() || m.test.empty()) {
    throw FormatError("split manifest: train and test lists are required");
  }
  return m;
}

inline void save_split_manifest(const std::filesystem::path& path, const SplitManifest& m) {
  const std::string text = format_split_manifest(m);
  detail::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline SplitManifest load_split_manifest(const std::filesystem::path& path) {
  const Bytes bytes = detail::read_file(path);
  return parse_split_manifest(std::string(bytes.begin(), bytes.end()));
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Each class gets a latent mean drawn from N(0, class_sep^2 I) in
/// class_dim dimensions; each sample adds a nuisance latent from
/// N(0, shared_strength^2 I) in shared_dim dimensions that is common to all
/// views of that sample. View t observes A_t [mean; nuisance] + N(0, noise^2 I)
/// with A_t entries drawn from N(0, 1 / (class_dim + shared_dim)).
struct SynthSpec {
  int classes = 6;
  std::vector<int> dims{8, 10, 12};  // one entry per view
  double class_sep = 1.0;
  double shared_strength = 1.0;
  double noise = 1.0;
  int per_class = 20;
  int class_dim = 0;   // 0 selects classes - 1 (at least 1)
  int shared_dim = 2;
  std::uint64_t seed = 0;
};

/// Samples are ordered class by class. Draw order: class means, then the
/// view maps (view by view, column-major), then per sample its nuisance
/// latent followed by each view's noise.
inline LabeledMultiviewDataset synth_multiview(const SynthSpec& spec) {
  if (spec.classes < 1 || spec.per_class < 1 || spec.dims.size() < 2 || spec.shared_dim < 0 ||
      spec.class_dim < 0) {
    throw InvalidInput("synth_multiview: invalid spec");
  }
  for (int m : spec.dims) {
    if (m < 1) throw InvalidInput("synth_multiview: view dims must be positive");
  }
  if (spec.class_sep < 0 || spec.shared_strength < 0 || spec.noise < 0) {
    throw InvalidInput("synth_multiview: scales must be non-negative");
  }
  const int kc = spec.class_dim > 0 ? spec.class_dim : std::max(1, spec.classes - 1);
  const int ks = spec.shared_dim;
  const int latent = kc + ks;
  Rng rng(spec.seed);

  Matrix means(kc, spec.classes);
  for (int c = 0; c < spec.classes; ++c) {
    for (int k = 0; k < kc; ++k) means(k, c) = spec.class_sep * rng.normal();
  }
  std::vector<Matrix> maps;
  const double map_scale = 1.0 / std::sqrt(static_cast<double>(latent));
  for (int m : spec.dims) {
    Matrix a(m, latent);
    for (int j = 0; j < latent; ++j) {
      for (int i = 0; i < m; ++i) a(i, j) = map_scale * rng.normal();
    }
    maps.push_back(std::move(a));
  }

  const int n = spec.classes * spec.per_class;
  std::vector<Matrix> data;
  for (int m : spec.dims) data.emplace_back(m, n);
  std::vector<int> labels(static_cast<std::size_t>(n));
  Vector z(latent);
  int col = 0;
  for (int c = 0; c < spec.classes; ++c) {
    for (int s = 0; s < spec.per_class; ++s, ++col) {
      z.head(kc) = means.col(c);
      for (int k = 0; k < ks; ++k) z(kc + k) = spec.shared_strength * rng.normal();
      for (std::size_t t = 0; t < maps.size(); ++t) {
        Vector x = maps[t] * z;
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += spec.noise * rng.normal();
        data[t].col(col) = x;
      }
      labels[static_cast<std::size_t>(col)] = c;
    }
  }
  std::vector<ViewMatrix> views;
  for (auto& d : data) views.emplace_back(std::move(d));
  return {std::move(views), std::move(labels), spec.classes};
}

}  // namespace lmcca
