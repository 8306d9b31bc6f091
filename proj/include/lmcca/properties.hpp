#pragma once

// Structural checks of the fusion system on a given dataset, run by the
// `synthcheck` command over randomly generated data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lmcca/dataset_io.hpp"
#include "lmcca/fusion.hpp"
#include "lmcca/linalg.hpp"

namespace lmcca {

struct PropertyResult {
  explicit PropertyResult(std::string n) : name(std::move(n)) {}

  std::string name;
  bool passed = true;
  double worst = 0.0;  // largest observed violation measure
  int checks = 0;
  std::string detail;  // first failure, if any

  void record(bool ok, double measure, const std::string& what) {
    ++checks;
    worst = std::max(worst, measure);
    if (!ok && passed) {
      passed = false;
      detail = what;
    }
  }
};

/// Largest |a_i - b_i| / max(1, |b|_inf); infinity on length mismatch.
inline double spectrum_gap(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Spectrum of 1/(P-1) (C - D) w = beta D w built straight from the stacked
/// views (C = X X^T, D its block diagonal), solved with Eigen's generalized
/// self-adjoint solver. Descending.
inline Vector multiset_reference_spectrum(const LabeledMultiviewDataset& centered,
                                          const std::vector<Matrix>& diag_blocks) {
  const Eigen::Index q = centered.total_dim();
  Matrix x(q, centered.samples());
  Matrix d = Matrix::Zero(q, q);
  Eigen::Index off = 0;
  for (std::size_t t = 0; t < centered.view_count(); ++t) {
    const auto& v = centered.view(t);
    x.middleRows(off, v.dim()) = v.data();
    d.block(off, off, v.dim(), v.dim()) = diag_blocks[t];
    off += v.dim();
  }
  const Matrix c = x * x.transpose();
  Matrix cross = c;
  off = 0;
  for (std::size_t t = 0; t < centered.view_count(); ++t) {
    const auto m = centered.view(t).dim();
    cross.block(off, off, m, m).setZero();
    off += m;
  }
  const double p = static_cast<double>(centered.view_count());
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(cross / (p - 1.0), d);
  Vector ev = solver.eigenvalues();
  ev.reverseInPlace();
  return ev;
}

/// Full spectrum of the library's system for a variant.
inline Vector system_spectrum(const LabeledMultiviewDataset& centered, Variant variant,
                              const FitConfig& cfg) {
  const SystemBlocks sys = assemble_system(centered, variant, cfg);
  const double p = static_cast<double>(centered.view_count());
  return sym_def_gev(SymMatrix(sys.e.matrix() / (p - 1.0)), sys.f_plus).eigenvalues;
}

struct SynthcheckOptions {
  int trials = 20;
  std::uint64_t seed = 0;
  double reduction_tol = 1e-10;
  double residual_tol = 1e-8;
  double constraint_tol = 1e-8;
};

/// Random dataset: 2-4 views of 1-8 dims, 2-4 classes and more than 2Q
/// samples so every diagonal block is nonsingular.
inline LabeledMultiviewDataset synthcheck_dataset(Rng& rng, int views_override = 0) {
  SynthSpec spec;
  const int p = views_override > 0 ? views_override : 2 + static_cast<int>(rng.below(3));
  spec.dims.clear();
  for (int t = 0; t < p; ++t) spec.dims.push_back(1 + static_cast<int>(rng.below(8)));
  spec.classes = 2 + static_cast<int>(rng.below(3));
  const int q = std::accumulate(spec.dims.begin(), spec.dims.end(), 0);
  const int floor_per_class = (2 * q + spec.classes - 1) / spec.classes + 1;
  spec.per_class = std::max(floor_per_class, 5 + static_cast<int>(rng.below(11)));
  spec.class_sep = 0.5 + 2.0 * rng.uniform();
  spec.shared_strength = 0.5 + 2.0 * rng.uniform();
  spec.noise = 0.5 + rng.uniform();
  spec.seed = rng.next();
  return synth_multiview(spec);
}

/// Runs every structural property over `trials` random datasets.
inline std::vector<PropertyResult> run_synthcheck(const SynthcheckOptions& opt) {
  PropertyResult reduction_cca{"reduction: lmcca with autocorrelation == cca (P=2)"};
  PropertyResult reduction_mcca{"reduction: lmcca with autocorrelation == mcca"};
  PropertyResult reduction_gcca{"reduction: lmcca == gcca (P=2)"};
  PropertyResult identity{"assembly: G - F == E exactly"};
  PropertyResult stationarity{"stationarity residual <= tol"};
  PropertyResult constraint{"constraint w^T F+ w == P"};
  PropertyResult bound{"kept dimension d <= Q"};
  PropertyResult rank{"rank(Sw) <= min(m, N - c)"};
  PropertyResult psd{"scatter is PSD"};
  PropertyResult permutation{"fit invariant under sample permutation"};
  PropertyResult labels{"mcca/cca ignore labels"};

  Rng rng(opt.seed);
  for (int trial = 0; trial < opt.trials; ++trial) {
    const auto ds = synthcheck_dataset(rng);
    const auto [centered, means] = center_views(ds);
    const std::string tag = "trial " + std::to_string(trial);
    const auto p = ds.view_count();

    FitConfig autocorr;
    autocorr.diagonal = DiagonalBlocks::kAutocorrelation;
    std::vector<Matrix> auto_blocks;
    std::vector<Matrix> scatter_blocks;
    for (const auto& v : centered.views()) {
      auto_blocks.push_back(cross_correlation(v, v));
      scatter_blocks.push_back(within_class_scatter(v, centered.labels(), centered.class_count()).matrix());
    }
    const Vector ref_auto = multiset_reference_spectrum(centered, auto_blocks);
    const Vector lm_auto = system_spectrum(centered, Variant::kLmcca, autocorr);
    const double gap_auto = spectrum_gap(lm_auto, ref_auto);
    if (p == 2) {
      const double gap = std::max(gap_auto, spectrum_gap(system_spectrum(centered, Variant::kCca, {}), ref_auto));
      reduction_cca.record(gap <= opt.reduction_tol, gap, tag);
      const Vector ref_scatter = multiset_reference_spectrum(centered, scatter_blocks);
      const double gap_g = std::max(spectrum_gap(system_spectrum(centered, Variant::kLmcca, {}), ref_scatter),
                                    spectrum_gap(system_spectrum(centered, Variant::kGcca, {}), ref_scatter));
      reduction_gcca.record(gap_g <= opt.reduction_tol, gap_g, tag);
    } else {
      const double gap = std::max(gap_auto, spectrum_gap(system_spectrum(centered, Variant::kMcca, {}), ref_auto));
      reduction_mcca.record(gap <= opt.reduction_tol, gap, tag);
    }

    for (Variant v : {Variant::kLmcca, Variant::kMcca, Variant::kGcca, Variant::kCca}) {
      if (is_pairwise(v) && p != 2) continue;
      const SystemBlocks sys = assemble_system(centered, v);
      const bool exact = (sys.g.matrix() - sys.f.matrix()).cwiseEqual(sys.e.matrix()).all();
      identity.record(exact, exact ? 0.0 : 1.0, tag + " " + std::string(to_string(v)));
    }

    const FitResult fr = fit_detailed(ds, Variant::kLmcca);
    const Matrix w = fr.model.stacked();
    const Matrix lhs = fr.system.e.matrix() / (static_cast<double>(p) - 1.0);
    double worst_res = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      worst_res = std::max(worst_res, gev_relative_residual(lhs, fr.system.f_plus.matrix(),
                                                            fr.model.eigenvalues(j), w.col(j)));
    }
    stationarity.record(worst_res <= opt.residual_tol, worst_res, tag);
    const double cres = constraint_residual(fr.model, fr.system.f_plus);
    constraint.record(cres <= opt.constraint_tol, cres, tag);
    bound.record(fr.model.d() <= ds.total_dim(), 0.0, tag);

    for (std::size_t t = 0; t < p; ++t) {
      const SymMatrix sw = within_class_scatter(ds.view(t), ds.labels(), ds.class_count());
      const auto cap = std::min<Eigen::Index>(ds.view(t).dim(), ds.samples() - ds.class_count());
      rank.record(rank_estimate(sw) <= cap, 0.0, tag);
      const Vector ev = sym_eig(sw).eigenvalues;
      const double floor = -1e-10 * sw.matrix().norm();
      const double low = ev(ev.size() - 1);
      psd.record(low >= floor, std::max(0.0, -low), tag);
    }

    std::vector<std::size_t> perm(static_cast<std::size_t>(ds.samples()));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    const FusionModel permuted = fit(ds.select(perm), Variant::kLmcca);
    const double gap_perm = spectrum_gap(permuted.eigenvalues, fr.model.eigenvalues);
    permutation.record(gap_perm <= opt.reduction_tol, gap_perm, tag);

    std::vector<int> relabeled(ds.labels());
    for (std::size_t i = relabeled.size() - 1; i > 0; --i) std::swap(relabeled[i], relabeled[rng.below(i + 1)]);
    const LabeledMultiviewDataset shuffled(ds.views(), relabeled, ds.class_count());
    const Variant unlabeled = p == 2 ? Variant::kCca : Variant::kMcca;
    const double gap_lab =
        spectrum_gap(fit(shuffled, unlabeled).eigenvalues, fit(ds, unlabeled).eigenvalues);
    labels.record(gap_lab <= 1e-12, gap_lab, tag);
  }
  return {reduction_cca, reduction_mcca, reduction_gcca, identity, stationarity, constraint,
          bound,         rank,           psd,            permutation, labels};
}

inline std::string format_report(const std::vector<PropertyResult>& results) {
  std::ostringstream os;
  os << std::scientific;
  os.precision(2);
  for (const auto& r : results) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name << "  (checks=" << r.checks
       << ", worst=" << r.worst << ")";
    if (!r.passed) os << "  first failure: " << r.detail;
    os << '\n';
  }
  return os.str();
}

}  // namespace lmcca
