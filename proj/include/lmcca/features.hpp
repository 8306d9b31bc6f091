#pragma once

// Grayscale image descriptors: Gabor magnitude statistics, Zernike moment
// magnitudes, a single-block HOG and uniform LBP histograms.
//
// Descriptor parameters (wavelengths, cell layout, LBP bin selection) are
// explicit configuration. The defaults produce 24 values per Gabor
// statistic, 36 Zernike magnitudes, 36 HOG bins and 59 LBP bins.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numbers>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "lmcca/errors.hpp"
#include "lmcca/linalg.hpp"

namespace lmcca {

/// Row-major grayscale image with pixel values in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int height, int width, std::vector<double> pixels)
      : height_(height), width_(width), pixels_(std::move(pixels)) {
    if (height_ < 1 || width_ < 1) throw InvalidInput("GrayImage: non-positive size");
    if (pixels_.size() != static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_)) {
      throw InvalidInput("GrayImage: pixel count does not match size");
    }
    for (double p : pixels_) {
      if (!std::isfinite(p)) throw InvalidInput("GrayImage: non-finite pixel");
    }
  }
  GrayImage(int height, int width, double fill = 0.0)
      : GrayImage(height, width,
                  std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                          static_cast<std::size_t>(std::max(width, 0)),
                                      fill)) {}

  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] double at(int i, int j) const {
    return pixels_[static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(j)];
  }
  double& at(int i, int j) {
    return pixels_[static_cast<std::size_t>(i) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(j)];
  }
  [[nodiscard]] const std::vector<double>& pixels() const { return pixels_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> pixels_;
};

inline void require_descriptor_size(const GrayImage& img) {
  if (img.height() < 8 || img.width() < 8) {
    throw InvalidInput("descriptor input must be at least 8x8");
  }
}

// ---------------------------------------------------------------------------
// Gabor
// ---------------------------------------------------------------------------

/// Complex Gabor bank. Scale s has wavelength base_wavelength * step^s and
/// Gaussian width sigma = bandwidth * wavelength; orientation o is o*pi/O.
/// Kernels span +-ceil(support * sigma) pixels and have their real part
/// shifted to zero mean so flat regions give no response.
struct GaborBankConfig {
  int scales = 4;
  int orientations = 6;
  double base_wavelength = 3.0;
  double wavelength_step = std::numbers::sqrt2;
  double bandwidth = 0.4;
  double aspect = 1.0;
  double support = 2.0;

  [[nodiscard]] int filters() const { return scales * orientations; }
  [[nodiscard]] double wavelength(int s) const {
    return base_wavelength * std::pow(wavelength_step, s);
  }
  [[nodiscard]] int radius(int s) const {
    return static_cast<int>(std::ceil(support * bandwidth * wavelength(s)));
  }
};

enum class GaborStat { kMean, kStd, kMedian };

/// (2r+1) x (2r+1) kernel, row-major, indexed by (dy + r, dx + r).
struct GaborKernel {
  int radius = 0;
  std::vector<std::complex<double>> taps;

  [[nodiscard]] std::complex<double> at(int dy, int dx) const {
    const int side = 2 * radius + 1;
    return taps[static_cast<std::size_t>((dy + radius) * side + (dx + radius))];
  }
};

inline void validate(const GaborBankConfig& cfg) {
  if (cfg.scales < 1 || cfg.orientations < 1) throw InvalidInput("Gabor: need >= 1 scale/orientation");
  if (!(cfg.base_wavelength > 0.0) || !(cfg.wavelength_step > 0.0) || !(cfg.bandwidth > 0.0) ||
      !(cfg.aspect > 0.0) || !(cfg.support > 0.0)) {
    throw InvalidInput("Gabor: wavelength, bandwidth, aspect and support must be positive");
  }
}

inline GaborKernel gabor_kernel(const GaborBankConfig& cfg, int scale, int orientation) {
  const double lambda = cfg.wavelength(scale);
  const double sigma = cfg.bandwidth * lambda;
  const double theta = std::numbers::pi * orientation / cfg.orientations;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  GaborKernel k;
  k.radius = cfg.radius(scale);
  const int side = 2 * k.radius + 1;
  k.taps.resize(static_cast<std::size_t>(side * side));
  std::vector<double> env(k.taps.size());
  double env_sum = 0.0;
  double cos_sum = 0.0;
  for (int dy = -k.radius; dy <= k.radius; ++dy) {
    for (int dx = -k.radius; dx <= k.radius; ++dx) {
      const double xr = dx * ct + dy * st;
      const double yr = -dx * st + dy * ct;
      const double g =
          std::exp(-(xr * xr + cfg.aspect * cfg.aspect * yr * yr) / (2.0 * sigma * sigma));
      const double phase = 2.0 * std::numbers::pi * xr / lambda;
      const auto idx = static_cast<std::size_t>((dy + k.radius) * side + (dx + k.radius));
      env[idx] = g;
      k.taps[idx] = {g * std::cos(phase), g * std::sin(phase)};
      env_sum += g;
      cos_sum += g * std::cos(phase);
    }
  }
  const double dc = cos_sum / env_sum;
  for (std::size_t i = 0; i < k.taps.size(); ++i) {
    k.taps[i] -= std::complex<double>(dc * env[i], 0.0);
  }
  return k;
}

/// Mirror index without repeating the edge pixel (-1 -> 1, n -> n-2).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

/// |response| of one filter at every pixel, row-major.
inline std::vector<double> gabor_magnitude(const GrayImage& img, const GaborKernel& k) {
  const int h = img.height();
  const int w = img.width();
  const int r = k.radius;
  const int side = 2 * r + 1;
  if (side > h || side > w) {
    throw InvalidInput("Gabor: image " + std::to_string(h) + "x" + std::to_string(w) +
                       " smaller than " + std::to_string(side) + "x" + std::to_string(side) +
                       " kernel");
  }
  // Reflect-padded copy so the inner loop is branch free.
  const int pw = w + 2 * r;
  std::vector<double> pad(static_cast<std::size_t>((h + 2 * r) * pw));
  for (int i = -r; i < h + r; ++i) {
    for (int j = -r; j < w + r; ++j) {
      pad[static_cast<std::size_t>((i + r) * pw + (j + r))] =
          img.at(reflect_index(i, h), reflect_index(j, w));
    }
  }
  std::vector<double> re(k.taps.size());
  std::vector<double> im(k.taps.size());
  for (std::size_t t = 0; t < k.taps.size(); ++t) {
    re[t] = k.taps[t].real();
    im[t] = k.taps[t].imag();
  }
  std::vector<double> out(static_cast<std::size_t>(h * w));
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double sr = 0.0;
      double si = 0.0;
      for (int u = 0; u < side; ++u) {
        const double* row = &pad[static_cast<std::size_t>((i + u) * pw + j)];
        const double* kr = &re[static_cast<std::size_t>(u * side)];
        const double* ki = &im[static_cast<std::size_t>(u * side)];
        for (int v = 0; v < side; ++v) {
          sr += row[v] * kr[v];
          si += row[v] * ki[v];
        }
      }
      out[static_cast<std::size_t>(i * w + j)] = std::hypot(sr, si);
    }
  }
  return out;
}

inline double reduce_stat(std::vector<double> values, GaborStat stat) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  switch (stat) {
    case GaborStat::kMean:
      return mean;
    case GaborStat::kStd: {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      return std::sqrt(ss / n);
    }
    case GaborStat::kMedian: {
      std::sort(values.begin(), values.end());
      const std::size_t mid = values.size() / 2;
      return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    }
  }
  return 0.0;
}

/// Mean, standard deviation and median of each filter's magnitude map,
/// computed from a single pass of filtering.
struct GaborStats {
  Vector mean;
  Vector std;
  Vector median;

  [[nodiscard]] const Vector& get(GaborStat s) const {
    return s == GaborStat::kMean ? mean : (s == GaborStat::kStd ? std : median);
  }
};

inline GaborStats gabor_all_stats(const GrayImage& img, const GaborBankConfig& cfg = {}) {
  validate(cfg);
  require_descriptor_size(img);
  GaborStats out{Vector(cfg.filters()), Vector(cfg.filters()), Vector(cfg.filters())};
  for (int s = 0; s < cfg.scales; ++s) {
    for (int o = 0; o < cfg.orientations; ++o) {
      const int idx = s * cfg.orientations + o;
      const auto mag = gabor_magnitude(img, gabor_kernel(cfg, s, o));
      out.mean(idx) = reduce_stat(mag, GaborStat::kMean);
      out.std(idx) = reduce_stat(mag, GaborStat::kStd);
      out.median(idx) = reduce_stat(mag, GaborStat::kMedian);
    }
  }
  return out;
}

/// One statistic per filter, scale-major then orientation.
inline Vector gabor_stats(const GrayImage& img, const GaborBankConfig& cfg, GaborStat stat) {
  return gabor_all_stats(img, cfg).get(stat);
}

// ---------------------------------------------------------------------------
// Zernike
// ---------------------------------------------------------------------------

/// (n, m) pairs with m >= 0, n - m even, n <= max_order, in lexicographic order.
inline std::vector<std::pair<int, int>> zernike_indices(int max_order) {
  std::vector<std::pair<int, int>> idx;
  for (int n = 0; n <= max_order; ++n) {
    for (int m = n % 2; m <= n; m += 2) idx.emplace_back(n, m);
  }
  return idx;
}

/// Pixel (i, j) of an h x w image sits at ((2j+1-w)/D, (2i+1-h)/D) with
/// D = min(h, w); only pixels inside the unit disk contribute. Returns
/// |A_nm| = (n+1)/pi * |sum f(x,y) R_nm(rho) e^{-i m theta}| * (2/D)^2.
///
/// Radial polynomials use the three-term recurrence
/// R_n^m = rho (R_{n-1}^{|m-1|} + R_{n-1}^{m+1}) - R_{n-2}^m.
inline Vector zernike_moments(const GrayImage& img, int max_order = 10) {
  if (max_order < 0) throw InvalidInput("zernike_moments: negative order");
  const auto indices = zernike_indices(max_order);
  const int h = img.height();
  const int w = img.width();
  const double diam = std::min(h, w);
  const double area = (2.0 / diam) * (2.0 / diam);
  const int stride = max_order + 2;  // m index runs to max_order + 1

  std::vector<std::complex<double>> acc(indices.size());
  std::vector<double> radial(static_cast<std::size_t>((max_order + 1) * stride));
  auto rad = [&](int n, int m) -> double& {
    return radial[static_cast<std::size_t>(n * stride + m)];
  };

  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double f = img.at(i, j);
      if (f == 0.0) continue;
      const double x = (2.0 * j + 1.0 - w) / diam;
      const double y = (2.0 * i + 1.0 - h) / diam;
      const double rho = std::hypot(x, y);
      if (rho > 1.0) continue;
      const double theta = std::atan2(y, x);

      std::fill(radial.begin(), radial.end(), 0.0);
      rad(0, 0) = 1.0;
      for (int n = 1; n <= max_order; ++n) {
        for (int m = n % 2; m <= n; m += 2) {
          const double lower = n >= 2 && m <= n - 2 ? rad(n - 2, m) : 0.0;
          rad(n, m) = rho * (rad(n - 1, std::abs(m - 1)) + rad(n - 1, m + 1)) - lower;
        }
      }
      for (std::size_t k = 0; k < indices.size(); ++k) {
        const auto [n, m] = indices[k];
        acc[k] += f * rad(n, m) * std::polar(1.0, -m * theta);
      }
    }
  }
  Vector out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const int n = indices[k].first;
    out(static_cast<Eigen::Index>(k)) = (n + 1) / std::numbers::pi * std::abs(acc[k]) * area;
  }
  return out;
}

// ---------------------------------------------------------------------------
// HOG
// ---------------------------------------------------------------------------

/// The image is split into cells_y x cells_x cells that together form one
/// block; the concatenated cell histograms are L2 normalized as
/// v / sqrt(|v|^2 + epsilon^2).
struct HogConfig {
  int cells_y = 2;
  int cells_x = 2;
  int bins = 9;
  double epsilon = 1e-6;
};

/// Central-difference gradients (replicated border), unsigned orientation in
/// [0, 180) degrees, magnitude-weighted hard binning.
inline Vector hog(const GrayImage& img, const HogConfig& cfg = {}) {
  require_descriptor_size(img);
  if (cfg.cells_y < 1 || cfg.cells_x < 1 || cfg.bins < 1) throw InvalidInput("hog: bad layout");
  if (cfg.cells_y > img.height() || cfg.cells_x > img.width()) {
    throw InvalidInput("hog: more cells than pixels");
  }
  const int h = img.height();
  const int w = img.width();
  Vector hist = Vector::Zero(cfg.cells_y * cfg.cells_x * cfg.bins);
  const double bin_width = 180.0 / cfg.bins;
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double gx = img.at(i, std::min(j + 1, w - 1)) - img.at(i, std::max(j - 1, 0));
      const double gy = img.at(std::min(i + 1, h - 1), j) - img.at(std::max(i - 1, 0), j);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      if (angle >= 180.0) angle -= 180.0;
      const int bin = std::min(static_cast<int>(angle / bin_width), cfg.bins - 1);
      const int cy = i * cfg.cells_y / h;
      const int cx = j * cfg.cells_x / w;
      hist((cy * cfg.cells_x + cx) * cfg.bins + bin) += mag;
    }
  }
  return hist / std::sqrt(hist.squaredNorm() + cfg.epsilon * cfg.epsilon);
}

// ---------------------------------------------------------------------------
// LBP
// ---------------------------------------------------------------------------

/// 8-neighbor LBP on the square ring at Chebyshev distance `radius`.
/// Neighbor k (clockwise from the top-left corner) sets bit k when it is
/// >= the center. Codes map to 58 uniform bins (ascending code order) plus
/// one bin for all non-uniform codes. The first `dims` bins are kept and
/// renormalized to unit L1 mass.
struct LbpConfig {
  int radius = 1;
  int neighbors = 8;
  int dims = 59;
};

inline constexpr int kLbpUniformBins = 59;

inline bool lbp_is_uniform(unsigned code) {
  int transitions = 0;
  for (int k = 0; k < 8; ++k) {
    const unsigned a = (code >> k) & 1U;
    const unsigned b = (code >> ((k + 1) % 8)) & 1U;
    transitions += a != b ? 1 : 0;
  }
  return transitions <= 2;
}

/// Bin of each 8-bit code under the uniform mapping.
inline std::array<int, 256> lbp_uniform_table() {
  std::array<int, 256> table{};
  int next = 0;
  for (unsigned code = 0; code < 256; ++code) {
    table[code] = lbp_is_uniform(code) ? next++ : kLbpUniformBins - 1;
  }
  return table;
}

inline constexpr std::array<std::pair<int, int>, 8> lbp_ring_offsets() {
  return {{{-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}}};
}

inline Vector lbp_hist(const GrayImage& img, const LbpConfig& cfg = {}) {
  require_descriptor_size(img);
  if (cfg.neighbors != 8) throw InvalidInput("lbp_hist: only 8 neighbors are supported");
  if (cfg.radius < 1 || 2 * cfg.radius >= std::min(img.height(), img.width())) {
    throw InvalidInput("lbp_hist: radius out of range");
  }
  if (cfg.dims < 1 || cfg.dims > kLbpUniformBins) {
    throw InvalidInput("lbp_hist: dims must be in [1, 59]");
  }
  static const auto table = lbp_uniform_table();
  const int r = cfg.radius;
  Vector hist = Vector::Zero(kLbpUniformBins);
  for (int i = r; i < img.height() - r; ++i) {
    for (int j = r; j < img.width() - r; ++j) {
      const double c = img.at(i, j);
      unsigned code = 0;
      int k = 0;
      for (const auto& [dy, dx] : lbp_ring_offsets()) {
        if (img.at(i + dy * r, j + dx * r) >= c) code |= 1U << k;
        ++k;
      }
      hist(table[code]) += 1.0;
    }
  }
  Vector out = hist.head(cfg.dims);
  const double mass = out.sum();
  if (mass > 0.0) out /= mass;
  return out;
}

// ---------------------------------------------------------------------------
// Batch extraction
// ---------------------------------------------------------------------------

enum class FeatureKind { kGaborMean, kGaborStd, kGaborMedian, kZernike, kHog, kLbp };

inline FeatureKind parse_feature_kind(const std::string& s) {
  if (s == "gabor-mean") return FeatureKind::kGaborMean;
  if (s == "gabor-std") return FeatureKind::kGaborStd;
  if (s == "gabor-median") return FeatureKind::kGaborMedian;
  if (s == "zernike") return FeatureKind::kZernike;
  if (s == "hog") return FeatureKind::kHog;
  if (s == "lbp") return FeatureKind::kLbp;
  throw InvalidInput("unknown feature kind '" + s + "'");
}

struct FeatureConfig {
  GaborBankConfig gabor{};
  int zernike_order = 10;
  HogConfig hog{};
  LbpConfig lbp{};
};

/// One feature matrix (dim x images) per requested kind. Images are
/// processed in parallel chunks; each column depends only on its image.
inline std::vector<Matrix> extract_views(const std::vector<GrayImage>& images,
                                         const std::vector<FeatureKind>& kinds,
                                         const FeatureConfig& cfg = {}, unsigned threads = 0) {
  const auto n = static_cast<Eigen::Index>(images.size());
  bool need_gabor = false;
  for (auto k : kinds) {
    need_gabor |= k == FeatureKind::kGaborMean || k == FeatureKind::kGaborStd ||
                  k == FeatureKind::kGaborMedian;
  }
  std::vector<std::vector<Vector>> cols(kinds.size(), std::vector<Vector>(images.size()));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      GaborStats gs;
      if (need_gabor) gs = gabor_all_stats(images[i], cfg.gabor);
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        switch (kinds[k]) {
          case FeatureKind::kGaborMean: cols[k][i] = gs.mean; break;
          case FeatureKind::kGaborStd: cols[k][i] = gs.std; break;
          case FeatureKind::kGaborMedian: cols[k][i] = gs.median; break;
          case FeatureKind::kZernike: cols[k][i] = zernike_moments(images[i], cfg.zernike_order); break;
          case FeatureKind::kHog: cols[k][i] = hog(images[i], cfg.hog); break;
          case FeatureKind::kLbp: cols[k][i] = lbp_hist(images[i], cfg.lbp); break;
        }
      }
    }
  };
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(images.size(), 1)));
  if (threads <= 1) {
    work(0, images.size());
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      const std::size_t chunk = (images.size() + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = std::min(images.size(), t * chunk);
        const std::size_t e = std::min(images.size(), b + chunk);
        pool.emplace_back([&, t, b, e] {
          try {
            work(b, e);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const Eigen::Index dim = n == 0 ? 0 : cols[k][0].size();
    Matrix m(dim, n);
    for (Eigen::Index i = 0; i < n; ++i) m.col(i) = cols[k][static_cast<std::size_t>(i)];
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace lmcca
