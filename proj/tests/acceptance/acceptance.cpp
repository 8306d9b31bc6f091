// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance <data-dir>   (the directory holding the mnist5k IDX files)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lmcca/lmcca.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using lmcca::FitConfig;
using lmcca::LabeledMultiviewDataset;
using lmcca::Matrix;
using lmcca::SymMatrix;
using lmcca::Variant;
using lmcca::Vector;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double gap(const Vector& a, const Vector& b) { return lmcca::spectrum_gap(a, b); }

std::vector<int> random_dims(fixture::Gen& gen, int p, int max_dim) {
  std::vector<int> dims;
  for (int t = 0; t < p; ++t) dims.push_back(static_cast<int>(gen.integer(1, max_dim)));
  return dims;
}

int total(const std::vector<int>& dims) {
  int q = 0;
  for (int m : dims) q += m;
  return q;
}

std::vector<Matrix> diag_blocks(const LabeledMultiviewDataset& centered, bool scatter) {
  std::vector<Matrix> out;
  for (const auto& v : centered.views()) {
    out.push_back(scatter ? lmcca::within_class_scatter(v, centered.labels(), centered.class_count()).matrix()
                          : lmcca::cross_correlation(v, v));
  }
  return out;
}

// ---------------------------------------------------------------------------

Verdict reductions() {
  Verdict v;
  fixture::Gen gen(101);
  FitConfig autocorr;
  autocorr.diagonal = lmcca::DiagonalBlocks::kAutocorrelation;
  double worst = 0.0;
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 50; ++trial) {
    const auto dims = random_dims(gen, 2, 8);
    const int classes = static_cast<int>(gen.integer(2, 4));
    const int n = static_cast<int>(gen.integer(total(dims) + classes + 2, 60));
    const auto ds = gen.dataset(dims, classes, n);
    const auto [centered, means] = lmcca::center_views(ds);

    const Vector ref_auto = lmcca::multiset_reference_spectrum(centered, diag_blocks(centered, false));
    const Vector ref_scatter = lmcca::multiset_reference_spectrum(centered, diag_blocks(centered, true));
    const double g_cca = std::max({gap(lmcca::fit(ds, Variant::kLmcca, autocorr).eigenvalues,
                                       lmcca::fit(ds, Variant::kCca).eigenvalues),
                                   gap(lmcca::system_spectrum(centered, Variant::kLmcca, autocorr), ref_auto),
                                   gap(lmcca::system_spectrum(centered, Variant::kCca, {}), ref_auto)});
    const double g_gcca = std::max({gap(lmcca::fit(ds, Variant::kLmcca).eigenvalues,
                                        lmcca::fit(ds, Variant::kGcca).eigenvalues),
                                    gap(lmcca::system_spectrum(centered, Variant::kLmcca, {}), ref_scatter),
                                    gap(lmcca::system_spectrum(centered, Variant::kGcca, {}), ref_scatter)});
    v.require(g_cca <= 1e-10, "cca trial " + std::to_string(trial));
    v.require(g_gcca <= 1e-10, "gcca trial " + std::to_string(trial));
    worst = std::max({worst, g_cca, g_gcca});
  }
  for (int trial = 0; trial < 50; ++trial) {
    const auto dims = random_dims(gen, 3 + trial % 2, 8);
    const int classes = static_cast<int>(gen.integer(2, 4));
    const int n = static_cast<int>(gen.integer(total(dims) + classes + 2, std::max(60, total(dims) + classes + 2)));
    const auto ds = gen.dataset(dims, classes, n);
    const auto [centered, means] = lmcca::center_views(ds);
    const Vector ref = lmcca::multiset_reference_spectrum(centered, diag_blocks(centered, false));
    const double g = std::max({gap(lmcca::fit(ds, Variant::kLmcca, autocorr).eigenvalues,
                                   lmcca::fit(ds, Variant::kMcca).eigenvalues),
                               gap(lmcca::system_spectrum(centered, Variant::kLmcca, autocorr), ref),
                               gap(lmcca::system_spectrum(centered, Variant::kMcca, {}), ref)});
    v.require(g <= 1e-10, "mcca trial " + std::to_string(trial));
    worst = std::max(worst, g);
  }
  const double secs = seconds_since(t0);
  v.require(secs < 10.0, "runtime");
  v.detail << "50 P=2 datasets (cca, gcca) + 50 P in {3,4} (mcca), worst relative gap " << worst << ", "
           << secs << " s";
  return v;
}

Verdict stationarity_and_constraint() {
  Verdict v;
  fixture::Gen gen(102);
  double worst_res = 0.0;
  double worst_con = 0.0;
  int pairs = 0;
  const Variant cycle[] = {Variant::kLmcca, Variant::kMcca, Variant::kGcca, Variant::kCca};
  for (int trial = 0; trial < 100; ++trial) {
    Variant variant = cycle[trial % 4];
    const int p = lmcca::is_pairwise(variant) ? 2 : static_cast<int>(gen.integer(2, 4));
    const auto dims = random_dims(gen, p, 8);
    const int classes = static_cast<int>(gen.integer(2, 5));
    const int n = static_cast<int>(gen.integer(classes + 2, 3 * total(dims) + 10));
    const auto ds = gen.dataset(dims, classes, n);
    const auto fr = lmcca::fit_detailed(ds, variant);
    const Matrix w = fr.model.stacked();
    const Matrix lhs = fr.system.e.matrix() / (static_cast<double>(p) - 1.0);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double r =
          lmcca::gev_relative_residual(lhs, fr.system.f_plus.matrix(), fr.model.eigenvalues(j), w.col(j));
      worst_res = std::max(worst_res, r);
      ++pairs;
    }
    const double c = lmcca::constraint_residual(fr.model, fr.system.f_plus);
    worst_con = std::max(worst_con, c);
    v.require(c <= 1e-8, "constraint trial " + std::to_string(trial));
  }
  v.require(worst_res <= 1e-8, "stationarity");
  v.detail << "100 fits, " << pairs << " eigenpairs, worst residual " << worst_res
           << ", worst |w'F+w - P| " << worst_con;
  return v;
}

Verdict dimension_bound() {
  Verdict v;
  fixture::Gen gen(103);
  int degenerate = 0;
  int rank_checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = static_cast<int>(gen.integer(2, 4));
    const auto dims = random_dims(gen, p, 8);
    const int q = total(dims);
    const int classes = static_cast<int>(gen.integer(2, 5));
    int n = 0;
    switch (trial % 3) {
      case 0: n = 10 * q; break;
      case 1: n = q / 2 + classes; break;
      default: n = static_cast<int>(gen.integer(classes + 1, 4 * q)); break;
    }
    const auto ds = gen.dataset(dims, classes, n);
    Eigen::Index d = 0;
    try {
      d = lmcca::fit(ds, Variant::kLmcca).d();
    } catch (const lmcca::DegenerateFit&) {
      ++degenerate;
    }
    v.require(d <= q, "d <= Q trial " + std::to_string(trial));
    for (std::size_t t = 0; t < ds.view_count(); ++t) {
      const auto sw = lmcca::within_class_scatter(ds.view(t), ds.labels(), ds.class_count());
      const int cap = std::min(dims[t], n - classes);
      v.require(lmcca::rank_estimate(sw) <= cap, "rank trial " + std::to_string(trial));
      ++rank_checks;
    }
  }
  v.detail << "100 instances (N = 10Q, N = Q/2 + c, random), " << rank_checks << " scatter rank checks";
  if (degenerate > 0) v.detail << ", " << degenerate << " fits kept nothing";
  return v;
}

Verdict assembly_identity() {
  Verdict v;
  fixture::Gen gen(104);
  int systems = 0;
  const FitConfig configs[] = {FitConfig{}, [] {
                                 FitConfig c;
                                 c.scale_by_n = true;
                                 c.prior = lmcca::PriorMode::kUniform;
                                 return c;
                               }()};
  for (int trial = 0; trial < 100; ++trial) {
    const int p = static_cast<int>(gen.integer(2, 4));
    const auto dims = random_dims(gen, p, 8);
    const int classes = static_cast<int>(gen.integer(2, 5));
    const auto ds = gen.dataset(dims, classes, static_cast<int>(gen.integer(classes + 1, 80)));
    const auto [centered, means] = lmcca::center_views(ds);
    for (Variant variant : {Variant::kLmcca, Variant::kMcca, Variant::kGcca, Variant::kCca}) {
      if (lmcca::is_pairwise(variant) && p != 2) continue;
      for (const auto& cfg : configs) {
        const auto sys = lmcca::assemble_system(centered, variant, cfg);
        v.require((sys.g.matrix() - sys.f.matrix()).cwiseEqual(sys.e.matrix()).all(),
                  "trial " + std::to_string(trial) + " " + std::string(lmcca::to_string(variant)));
        ++systems;
      }
    }
  }
  v.detail << systems << " assembled systems, all four variants, entrywise equality";
  return v;
}

Verdict oracle_equivalence() {
  Verdict v;
  fixture::Gen gen(105);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = gen.integer(2, 4);
    const Matrix a = gen.symmetric(n);
    const Matrix b = gen.spd(n);
    const auto sol = lmcca::sym_def_gev(SymMatrix(a), SymMatrix(b));
    const auto ref = oracle::gev_spectrum(a, b);
    for (Eigen::Index i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(sol.eigenvalues(i) - ref[static_cast<std::size_t>(i)]));
    }
  }
  v.require(worst <= 1e-7, "eigenvalue gap");
  v.detail << "200 pairs of size 2-4, worst eigenvalue gap " << worst;
  return v;
}

Verdict synthetic_gain() {
  Verdict v;
  const auto t0 = Clock::now();
  int wins = 0;
  double gain_sum = 0.0;
  double single_sum = 0.0;
  int single_count = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    lmcca::SynthSpec spec;
    spec.classes = 6;
    spec.dims = {8, 10, 12};
    spec.class_sep = 1.5;
    spec.shared_strength = 3.0;
    spec.noise = 1.0;
    spec.per_class = 40;
    spec.seed = seed;
    const auto ds = lmcca::synth_multiview(spec);
    const auto split = lmcca::stratified_split(ds.labels(), 0.5, seed);
    const auto train = ds.select(split.train);
    const auto test = ds.select(split.test);
    for (std::size_t t = 0; t < ds.view_count(); ++t) {
      const auto pred = lmcca::nn_classify_raw(train.view(t).data(), train.labels(), test.view(t).data());
      single_sum += lmcca::accuracy(pred, test.labels());
      ++single_count;
    }
    const double lm = lmcca::full_sweep(lmcca::fit(train, Variant::kLmcca), train, test).best_accuracy;
    const double mc = lmcca::full_sweep(lmcca::fit(train, Variant::kMcca), train, test).best_accuracy;
    wins += lm >= mc ? 1 : 0;
    gain_sum += lm - mc;
  }
  const double single_mean = single_sum / single_count;
  const double secs = seconds_since(t0);
  v.require(wins >= 15, "wins");
  v.require(gain_sum >= 0.0, "mean gain");
  v.require(single_mean >= 0.60 && single_mean <= 0.80, "single-view accuracy outside 60-80%");
  v.require(secs < 120.0, "runtime");
  v.detail << "lmcca >= mcca on " << wins << "/20 seeds, mean gain " << 100.0 * gain_sum / 20.0
           << " points, mean single-view accuracy " << 100.0 * single_mean << "%, " << secs << " s";
  return v;
}

Verdict mnist(const std::filesystem::path& data_dir) {
  Verdict v;
  const auto t0 = Clock::now();
  const auto images_path = data_dir / "mnist5k-images-idx3-ubyte";
  const auto labels_path = data_dir / "mnist5k-labels-idx1-ubyte";
  if (!std::filesystem::exists(images_path) || !std::filesystem::exists(labels_path)) {
    v.require(false, "MNIST subset not found in " + data_dir.string());
    return v;
  }
  auto images = lmcca::load_idx_images(images_path);
  auto labels = lmcca::load_idx_labels(labels_path);
  std::vector<lmcca::GrayImage> kept;
  std::vector<int> kept_labels;
  for (std::size_t i : lmcca::per_class_subset(labels, 300)) {
    kept.push_back(std::move(images[i]));
    kept_labels.push_back(labels[i]);
  }
  const std::vector<std::string> names{"gabor-mean", "gabor-std", "zernike"};
  std::vector<lmcca::FeatureKind> kinds;
  for (const auto& n : names) kinds.push_back(lmcca::parse_feature_kind(n));
  auto mats = lmcca::extract_views(kept, kinds);
  std::vector<lmcca::ViewMatrix> views;
  for (auto& m : mats) views.emplace_back(std::move(m));
  const LabeledMultiviewDataset ds(std::move(views), kept_labels, 10);
  const auto split = lmcca::stratified_split(ds.labels(), 0.5, 0);
  const auto train = ds.select(split.train);
  const auto test = ds.select(split.test);
  const auto rep = lmcca::compare_methods(train, test, names);

  const double targets[] = {0.4913, 0.5260, 0.7020};
  v.require(ds.samples() == 3000 && train.samples() == 1500 && test.samples() == 1500, "subset size");
  v.require(ds.total_dim() == 84, "Q = 84");
  v.detail << std::fixed;
  v.detail.precision(2);
  v.detail << "single";
  for (std::size_t t = 0; t < 3; ++t) {
    const double acc = rep.single_views[t].best_accuracy;
    v.require(std::abs(acc - targets[t]) <= 0.10, names[t] + " outside +-10 points");
    v.detail << ' ' << names[t] << '=' << 100.0 * acc;
  }
  const auto& lm = rep.fused_result(Variant::kLmcca);
  v.detail << "; serial=" << 100.0 * rep.serial.best_accuracy;
  for (Variant other : {Variant::kCca, Variant::kGcca, Variant::kMcca}) {
    const auto& r = rep.fused_result(other);
    v.require(r.error.empty() && lm.best_accuracy > r.best_accuracy,
              "lmcca not above " + std::string(lmcca::to_string(other)));
    v.detail << ' ' << r.name << '=' << 100.0 * r.best_accuracy;
  }
  v.require(lm.error.empty(), "lmcca fit failed");
  v.require(lm.best_accuracy > rep.serial.best_accuracy, "lmcca not above serial");
  v.require(lm.best_d >= 1 && lm.best_d <= 84, "best d > 84");
  const double secs = seconds_since(t0);
  v.require(secs < 300.0, "runtime");
  v.detail << " lmcca=" << 100.0 * lm.best_accuracy << " (d=" << lm.best_d << " of " << lm.model_d << "); "
           << secs << " s";
  return v;
}

Verdict metric_suite() {
  Verdict v;
  fixture::Gen gen(108);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index d = gen.integer(1, 8);
    const Eigen::Index p = gen.integer(2, 4);
    const lmcca::FusedRepresentation x(gen.matrix(d, p));
    const lmcca::FusedRepresentation y(gen.matrix(d, p));
    const lmcca::FusedRepresentation z(gen.matrix(d, p));
    const double xy = lmcca::matrix_distance(x, y);
    const double yx = lmcca::matrix_distance(y, x);
    const double xz = lmcca::matrix_distance(x, z);
    const double yz = lmcca::matrix_distance(y, z);
    v.require(xy >= 0.0, "non-negativity");
    v.require(lmcca::matrix_distance(x, x) == 0.0 && xy > 1e-10, "identity of indiscernibles");
    v.require(std::abs(xy - yx) <= 1e-10, "symmetry");
    v.require(xz <= xy + yz + 1e-10, "triangle inequality");
    worst = std::max({worst, std::abs(xy - yx), std::max(0.0, xz - xy - yz)});
  }

  // Identity sample, nearer label and the lowest-index tie rule.
  std::vector<lmcca::FusedRepresentation> train;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    Matrix m(1, 2);
    m << 10.0 + i, 0.0;
    train.emplace_back(m);
    labels.push_back(i);
  }
  Matrix near(1, 2);
  near << 1.0, 0.0;
  Matrix mirrored(1, 2);
  mirrored << -1.0, 0.0;
  train[3] = lmcca::FusedRepresentation(near);
  train[7] = lmcca::FusedRepresentation(mirrored);
  const lmcca::FusedRepresentation origin(Matrix::Zero(1, 2));
  v.require(lmcca::nn_classify(train, labels, origin) == 3, "tie rule");
  for (std::size_t k = 0; k < train.size(); ++k) {
    v.require(lmcca::nn_classify(train, labels, train[k]) == labels[k], "identity sample");
  }
  Matrix a(2, 2);
  a << 3, 4, 5, 12;
  v.require(lmcca::matrix_distance(lmcca::FusedRepresentation(Matrix::Zero(2, 2)), lmcca::FusedRepresentation(a)) ==
                18.0,
            "row-sum fixture");
  v.detail << "500 triples, worst axiom slack " << worst << "; identity, tie and distance fixtures exact";
  return v;
}

lmcca::GrayImage random_image(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> px(static_cast<std::size_t>(h * w));
  for (auto& p : px) p = u(rng);
  return {h, w, std::move(px)};
}

lmcca::GrayImage rotate90(const lmcca::GrayImage& img) {
  const int n = img.height();
  lmcca::GrayImage out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out.at(j, n - 1 - i) = img.at(i, j);
  }
  return out;
}

Verdict feature_oracles() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(109);
  double rot = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    auto img = random_image(rng, 28, 28);
    const Vector base = lmcca::zernike_moments(img);
    for (int turn = 0; turn < 3; ++turn) {
      img = rotate90(img);
      rot = std::max(rot, (lmcca::zernike_moments(img) - base).cwiseAbs().maxCoeff());
    }
  }
  v.require(rot <= 1e-6, "zernike rotation");

  double sum_gap = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto img = random_image(rng, 14 + 2 * trial, 16);
    const Vector got = lmcca::zernike_moments(img);
    const auto idx = lmcca::zernike_indices(10);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      sum_gap = std::max(sum_gap, std::abs(got(static_cast<Eigen::Index>(k)) -
                                           oracle::zernike_magnitude(img, idx[k].first, idx[k].second)));
    }
  }
  v.require(sum_gap <= 1e-8, "zernike double sum");

  int lbp_images = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto img = random_image(rng, 8 + trial % 10, 8 + trial % 5);
    const Vector got = lmcca::lbp_hist(img);
    const auto ref = oracle::lbp_histogram(img);
    bool equal = true;
    for (int b = 0; b < 59; ++b) equal = equal && got(b) == ref[static_cast<std::size_t>(b)];
    v.require(equal, "lbp naive loop");
    ++lbp_images;
  }

  const auto zero = lmcca::gabor_all_stats(lmcca::GrayImage(28, 28, 0.0));
  v.require(zero.mean.isZero(0.0) && zero.std.isZero(0.0) && zero.median.isZero(0.0), "gabor zero image");
  double scale_gap = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto img = random_image(rng, 28, 28);
    std::vector<double> px = img.pixels();
    for (auto& p : px) p *= 2.5;
    const auto a = lmcca::gabor_all_stats(img);
    const auto b = lmcca::gabor_all_stats(lmcca::GrayImage(28, 28, std::move(px)));
    scale_gap = std::max({scale_gap, (b.mean - 2.5 * a.mean).cwiseAbs().maxCoeff() / a.mean.norm(),
                          (b.std - 2.5 * a.std).cwiseAbs().maxCoeff() / a.std.norm()});
  }
  v.require(scale_gap <= 1e-12, "gabor scaling");
  const double secs = seconds_since(t0);
  v.require(secs < 60.0, "runtime");
  v.detail << "zernike rotation gap " << rot << ", double-sum gap " << sum_gap << ", lbp " << lbp_images
           << " images exact, gabor zero exact, scaling gap " << scale_gap << ", " << secs << " s";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path data_dir = argc > 1 ? argv[1] : "data";
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"reduction equivalences", reductions},
      {"stationarity and constraint", stationarity_and_constraint},
      {"dimension and rank bounds", dimension_bound},
      {"assembly identity G - F == E", assembly_identity},
      {"generalized eigensolver vs characteristic polynomial", oracle_equivalence},
      {"synthetic fusion gain", synthetic_gain},
      {"MNIST desk-scale comparison", [&] { return mnist(data_dir); }},
      {"classifier metric suite", metric_suite},
      {"feature oracles", feature_oracles},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << k + 1 << "] " << criteria[k].first << ": "
              << v.detail.str() << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
