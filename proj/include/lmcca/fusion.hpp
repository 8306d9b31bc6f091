#pragma once

// Labeled multiset canonical correlation fusion.
//
// All four variants share one generalized eigenproblem
//
//     1/(P-1) * E w = lambda * F+ w
//
// where E holds the cross-correlation blocks R_kl = X_k X_l^T off the
// diagonal and F+ is block diagonal. The variants differ only in the
// diagonal blocks and the admissible number of views:
//
//   variant | diagonal block of F          | views
//   --------+------------------------------+------
//   LMCCA   | within-class scatter Sw_t    | P >= 2
//   MCCA    | autocorrelation R_tt         | P >= 2
//   GCCA    | within-class scatter Sw_t    | P == 2
//   CCA     | autocorrelation R_tt         | P == 2
//
// For P == 2 the factor 1/(P-1) is 1 and the system is the classical
// pairwise one. GCCA uses the identity link and unit design coefficients,
// for which the stationarity system is exactly the pairwise LMCCA one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lmcca/errors.hpp"
#include "lmcca/linalg.hpp"

namespace lmcca {

enum class Variant { kLmcca, kMcca, kGcca, kCca };
enum class PriorMode { kEmpirical, kUniform };

/// Which matrix fills the diagonal blocks of F. kVariantDefault follows the
/// variant table above; the explicit choices exist for the reduction checks.
enum class DiagonalBlocks { kVariantDefault, kScatter, kAutocorrelation };

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kLmcca: return "lmcca";
    case Variant::kMcca: return "mcca";
    case Variant::kGcca: return "gcca";
    case Variant::kCca: return "cca";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  if (s == "lmcca") return Variant::kLmcca;
  if (s == "mcca") return Variant::kMcca;
  if (s == "gcca") return Variant::kGcca;
  if (s == "cca") return Variant::kCca;
  throw InvalidInput("unknown variant '" + std::string(s) + "'");
}

inline std::string_view to_string(PriorMode p) {
  return p == PriorMode::kEmpirical ? "empirical" : "uniform";
}

inline PriorMode parse_prior_mode(std::string_view s) {
  if (s == "empirical") return PriorMode::kEmpirical;
  if (s == "uniform") return PriorMode::kUniform;
  throw InvalidInput("unknown prior mode '" + std::string(s) + "'");
}

inline bool is_pairwise(Variant v) { return v == Variant::kGcca || v == Variant::kCca; }

inline bool uses_scatter(Variant v, DiagonalBlocks diag) {
  if (diag == DiagonalBlocks::kScatter) return true;
  if (diag == DiagonalBlocks::kAutocorrelation) return false;
  return v == Variant::kLmcca || v == Variant::kGcca;
}

/// One modality: m x N, one column per sample.
class ViewMatrix {
 public:
  ViewMatrix() = default;
  explicit ViewMatrix(Matrix data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) throw InvalidInput("ViewMatrix: empty view");
    if (!data_.allFinite()) throw InvalidInput("ViewMatrix: non-finite entries");
  }

  [[nodiscard]] Eigen::Index dim() const { return data_.rows(); }
  [[nodiscard]] Eigen::Index samples() const { return data_.cols(); }
  [[nodiscard]] const Matrix& data() const { return data_; }

 private:
  Matrix data_;
};

/// P aligned views plus class labels in [0, class_count).
class LabeledMultiviewDataset {
 public:
  LabeledMultiviewDataset() = default;
  LabeledMultiviewDataset(std::vector<ViewMatrix> views, std::vector<int> labels, int class_count)
      : views_(std::move(views)), labels_(std::move(labels)), class_count_(class_count) {
    if (views_.size() < 2) throw InvalidInput("dataset needs at least two views");
    const Eigen::Index n = views_.front().samples();
    for (const auto& v : views_) {
      if (v.samples() != n) throw InvalidInput("dataset views disagree on sample count");
    }
    if (static_cast<Eigen::Index>(labels_.size()) != n) {
      throw InvalidInput("dataset label count does not match sample count");
    }
    if (class_count_ < 1) throw InvalidInput("dataset needs at least one class");
    std::vector<int> counts(static_cast<std::size_t>(class_count_), 0);
    for (int y : labels_) {
      if (y < 0 || y >= class_count_) {
        throw InvalidInput("label " + std::to_string(y) + " outside [0, " +
                           std::to_string(class_count_) + ")");
      }
      ++counts[static_cast<std::size_t>(y)];
    }
    for (int i = 0; i < class_count_; ++i) {
      if (counts[static_cast<std::size_t>(i)] == 0) {
        throw InvalidInput("class " + std::to_string(i) + " has no samples");
      }
    }
  }

  [[nodiscard]] std::size_t view_count() const { return views_.size(); }
  [[nodiscard]] Eigen::Index samples() const { return views_.front().samples(); }
  [[nodiscard]] int class_count() const { return class_count_; }
  [[nodiscard]] const std::vector<ViewMatrix>& views() const { return views_; }
  [[nodiscard]] const ViewMatrix& view(std::size_t t) const { return views_.at(t); }
  [[nodiscard]] const std::vector<int>& labels() const { return labels_; }

  [[nodiscard]] std::vector<Eigen::Index> view_dims() const {
    std::vector<Eigen::Index> dims;
    for (const auto& v : views_) dims.push_back(v.dim());
    return dims;
  }

  /// Q = m_1 + ... + m_P.
  [[nodiscard]] Eigen::Index total_dim() const {
    Eigen::Index q = 0;
    for (const auto& v : views_) q += v.dim();
    return q;
  }

  /// Dataset restricted to the given sample columns, in the given order.
  [[nodiscard]] LabeledMultiviewDataset select(std::span<const std::size_t> idx) const {
    std::vector<ViewMatrix> views;
    for (const auto& v : views_) {
      Matrix m(v.dim(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t j = 0; j < idx.size(); ++j) {
        m.col(static_cast<Eigen::Index>(j)) = v.data().col(static_cast<Eigen::Index>(idx[j]));
      }
      views.emplace_back(std::move(m));
    }
    std::vector<int> labels;
    labels.reserve(idx.size());
    for (std::size_t i : idx) labels.push_back(labels_.at(i));
    return {std::move(views), std::move(labels), class_count_};
  }

 private:
  std::vector<ViewMatrix> views_;
  std::vector<int> labels_;
  int class_count_ = 0;
};

/// Subtracts each view's row means. The means are returned so held-out
/// samples can be centered consistently.
inline std::pair<LabeledMultiviewDataset, std::vector<Vector>> center_views(
    const LabeledMultiviewDataset& ds) {
  std::vector<ViewMatrix> views;
  std::vector<Vector> means;
  for (const auto& v : ds.views()) {
    Vector mean = v.data().rowwise().mean();
    views.emplace_back(v.data().colwise() - mean);
    means.push_back(std::move(mean));
  }
  return {LabeledMultiviewDataset(std::move(views), ds.labels(), ds.class_count()),
          std::move(means)};
}

/// Sw = sum_i p(w_i) * (1/l_i) * sum_j (x_ij - m_i)(x_ij - m_i)^T with
/// p(w_i) = l_i / N (empirical) or 1 / c (uniform).
inline SymMatrix within_class_scatter(const ViewMatrix& view, std::span<const int> labels,
                                      int class_count, PriorMode prior = PriorMode::kEmpirical) {
  const Eigen::Index n = view.samples();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw InvalidInput("within_class_scatter: " + std::to_string(labels.size()) +
                       " labels for " + std::to_string(n) + " samples");
  }
  if (class_count < 1) throw InvalidInput("within_class_scatter: class_count < 1");

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(class_count));
  for (Eigen::Index j = 0; j < n; ++j) {
    const int y = labels[static_cast<std::size_t>(j)];
    if (y < 0 || y >= class_count) throw InvalidInput("within_class_scatter: label out of range");
    members[static_cast<std::size_t>(y)].push_back(j);
  }

  const Eigen::Index m = view.dim();
  Matrix sw = Matrix::Zero(m, m);
  for (int i = 0; i < class_count; ++i) {
    const auto& cols = members[static_cast<std::size_t>(i)];
    if (cols.empty()) {
      throw InvalidInput("within_class_scatter: class " + std::to_string(i) + " has no samples");
    }
    const auto li = static_cast<double>(cols.size());
    Matrix dev(m, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      dev.col(static_cast<Eigen::Index>(k)) = view.data().col(cols[k]);
    }
    const Vector mean = dev.rowwise().mean();
    dev.colwise() -= mean;
    const double prior_i = prior == PriorMode::kEmpirical ? li / static_cast<double>(n)
                                                          : 1.0 / static_cast<double>(class_count);
    sw.noalias() += (prior_i / li) * (dev * dev.transpose());
  }
  return SymMatrix(std::move(sw));
}

/// R_kl = X_k X_l^T (raw sum of outer products over samples).
inline Matrix cross_correlation(const ViewMatrix& view_k, const ViewMatrix& view_l) {
  if (view_k.samples() != view_l.samples()) {
    throw InvalidInput("cross_correlation: sample counts differ (" +
                       std::to_string(view_k.samples()) + " vs " +
                       std::to_string(view_l.samples()) + ")");
  }
  return view_k.data() * view_l.data().transpose();
}

struct FitConfig {
  PriorMode prior = PriorMode::kEmpirical;
  Regularization regularization{};
  /// Eigenvalues must exceed pos_tol * max|lambda| to be kept.
  double pos_tol = 1e-10;
  DiagonalBlocks diagonal = DiagonalBlocks::kVariantDefault;
  /// Divide every correlation block by N. Leaves the eigenvectors unchanged.
  bool scale_by_n = false;
};

/// The assembled eigenproblem. G = E + F with the unregularized F, so
/// G - F == E entrywise.
struct SystemBlocks {
  SymMatrix e;
  SymMatrix f;
  SymMatrix f_plus;
  SymMatrix g;
  std::vector<Eigen::Index> offsets;  // first row of each view's block
  std::vector<Eigen::Index> dims;
};

inline void check_variant_views(Variant variant, std::size_t views) {
  if (is_pairwise(variant) && views != 2) {
    throw VariantMismatch(std::string(to_string(variant)) + " needs exactly 2 views, got " +
                          std::to_string(views));
  }
}

/// Builds E, F, F+ and G from an already centered dataset.
inline SystemBlocks assemble_system(const LabeledMultiviewDataset& centered, Variant variant,
                                    const FitConfig& cfg = {}) {
  const std::size_t p = centered.view_count();
  check_variant_views(variant, p);
  const bool scatter = uses_scatter(variant, cfg.diagonal);
  const double corr_scale = cfg.scale_by_n ? 1.0 / static_cast<double>(centered.samples()) : 1.0;

  SystemBlocks sys;
  Eigen::Index q = 0;
  for (const auto& v : centered.views()) {
    sys.offsets.push_back(q);
    sys.dims.push_back(v.dim());
    q += v.dim();
  }

  Matrix e = Matrix::Zero(q, q);
  Matrix f = Matrix::Zero(q, q);
  Matrix f_plus = Matrix::Zero(q, q);
  for (std::size_t k = 0; k < p; ++k) {
    const Eigen::Index ok = sys.offsets[k];
    const Eigen::Index mk = sys.dims[k];
    for (std::size_t l = k + 1; l < p; ++l) {
      const Eigen::Index ol = sys.offsets[l];
      const Eigen::Index ml = sys.dims[l];
      const Matrix r = corr_scale * cross_correlation(centered.view(k), centered.view(l));
      e.block(ok, ol, mk, ml) = r;
      e.block(ol, ok, ml, mk) = r.transpose();
    }
    const SymMatrix diag =
        scatter ? within_class_scatter(centered.view(k), centered.labels(), centered.class_count(),
                                       cfg.prior)
                : SymMatrix(corr_scale * cross_correlation(centered.view(k), centered.view(k)));
    f.block(ok, ok, mk, mk) = diag.matrix();
    f_plus.block(ok, ok, mk, mk) = regularize(diag, cfg.regularization).matrix();
  }
  Matrix g = e + f;
  sys.e = SymMatrix(std::move(e));
  sys.f = SymMatrix(std::move(f));
  sys.f_plus = SymMatrix(std::move(f_plus));
  sys.g = SymMatrix(std::move(g));
  return sys;
}

/// Fitted projection. blocks[t] is m_t x d; column j of the stacked blocks
/// is the j-th canonical direction, scaled so w^T F+ w = P.
struct FusionModel {
  Variant variant = Variant::kLmcca;
  PriorMode prior = PriorMode::kEmpirical;
  std::vector<Matrix> blocks;
  Vector eigenvalues;
  std::vector<Vector> view_means;
  Eigen::Index q = 0;

  [[nodiscard]] Eigen::Index d() const { return eigenvalues.size(); }
  [[nodiscard]] std::size_t view_count() const { return blocks.size(); }

  /// All blocks stacked into a Q x d matrix.
  [[nodiscard]] Matrix stacked() const {
    Matrix w(q, d());
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      w.middleRows(off, b.rows()) = b;
      off += b.rows();
    }
    return w;
  }
};

struct FitResult {
  FusionModel model;
  SystemBlocks system;
  /// Achieved value of the normalized correlation objective per kept
  /// direction; diagnostics only.
  Vector objective;
};

/// Fits and also returns the assembled system.
inline FitResult fit_detailed(const LabeledMultiviewDataset& ds, Variant variant,
                              const FitConfig& cfg = {}) {
  check_variant_views(variant, ds.view_count());
  auto [centered, means] = center_views(ds);
  FitResult out;
  out.system = assemble_system(centered, variant, cfg);
  const auto p = static_cast<double>(ds.view_count());

  const SymMatrix lhs(out.system.e.matrix() / (p - 1.0));
  const GevSolution gev = sym_def_gev(lhs, out.system.f_plus);

  double max_abs = 0.0;
  for (Eigen::Index j = 0; j < gev.eigenvalues.size(); ++j) {
    max_abs = std::max(max_abs, std::abs(gev.eigenvalues(j)));
  }
  const double cut = cfg.pos_tol * max_abs;
  Eigen::Index kept = 0;
  while (kept < gev.eigenvalues.size() && gev.eigenvalues(kept) > cut &&
         gev.eigenvalues(kept) > 0.0) {
    ++kept;
  }
  if (kept == 0) throw DegenerateFit("fit: no eigenvalue above the positivity threshold");

  Matrix w = gev.eigenvectors.leftCols(kept);
  const Matrix& fp = out.system.f_plus.matrix();
  for (Eigen::Index j = 0; j < kept; ++j) {
    const double norm = w.col(j).dot(fp * w.col(j));
    w.col(j) *= std::sqrt(p / norm);
  }

  FusionModel& model = out.model;
  model.variant = variant;
  model.prior = cfg.prior;
  model.eigenvalues = gev.eigenvalues.head(kept);
  model.view_means = std::move(means);
  model.q = ds.total_dim();
  for (std::size_t t = 0; t < ds.view_count(); ++t) {
    model.blocks.emplace_back(w.middleRows(out.system.offsets[t], out.system.dims[t]));
  }

  out.objective.resize(kept);
  const Matrix& e = out.system.e.matrix();
  for (Eigen::Index j = 0; j < kept; ++j) {
    out.objective(j) = w.col(j).dot(e * w.col(j)) / (p - 1.0) / w.col(j).dot(fp * w.col(j));
  }
  return out;
}

/// Centers the data, solves the eigenproblem, keeps the positive part of
/// the spectrum and normalizes each direction to w^T F+ w = P.
inline FusionModel fit(const LabeledMultiviewDataset& ds, Variant variant,
                       const FitConfig& cfg = {}) {
  return fit_detailed(ds, variant, cfg).model;
}

/// d x P matrix of canonical variates; column t belongs to view t.
class FusedRepresentation {
 public:
  FusedRepresentation() = default;
  explicit FusedRepresentation(Matrix values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw InvalidInput("FusedRepresentation: non-finite entries");
  }

  [[nodiscard]] Eigen::Index d() const { return values_.rows(); }
  [[nodiscard]] Eigen::Index views() const { return values_.cols(); }
  [[nodiscard]] const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

inline void check_d_used(const FusionModel& model, Eigen::Index d_used) {
  if (d_used < 1 || d_used > model.d()) {
    throw InvalidInput("project: d_used=" + std::to_string(d_used) + " outside [1, " +
                       std::to_string(model.d()) + "]");
  }
}

/// Column t of the result is blocks[t](:, 0:d_used)^T (x_t - mean_t).
inline FusedRepresentation project(const FusionModel& model, std::span<const Vector> sample,
                                   Eigen::Index d_used) {
  check_d_used(model, d_used);
  if (sample.size() != model.view_count()) {
    throw InvalidInput("project: expected " + std::to_string(model.view_count()) + " views");
  }
  Matrix out(d_used, static_cast<Eigen::Index>(sample.size()));
  for (std::size_t t = 0; t < sample.size(); ++t) {
    const Matrix& b = model.blocks[t];
    if (sample[t].size() != b.rows()) throw InvalidInput("project: view dimension mismatch");
    out.col(static_cast<Eigen::Index>(t)) =
        b.leftCols(d_used).transpose() * (sample[t] - model.view_means[t]);
  }
  return FusedRepresentation(std::move(out));
}

/// Projects every sample (column) of the given views.
inline std::vector<FusedRepresentation> project_all(const FusionModel& model,
                                                    const std::vector<ViewMatrix>& views,
                                                    Eigen::Index d_used) {
  check_d_used(model, d_used);
  if (views.size() != model.view_count()) {
    throw InvalidInput("project_all: expected " + std::to_string(model.view_count()) + " views");
  }
  const Eigen::Index n = views.front().samples();
  std::vector<Matrix> per_view;
  for (std::size_t t = 0; t < views.size(); ++t) {
    const Matrix& b = model.blocks[t];
    if (views[t].dim() != b.rows()) throw InvalidInput("project_all: view dimension mismatch");
    if (views[t].samples() != n) throw InvalidInput("project_all: sample counts differ");
    per_view.push_back(b.leftCols(d_used).transpose() *
                       (views[t].data().colwise() - model.view_means[t]));
  }
  std::vector<FusedRepresentation> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Matrix rep(d_used, static_cast<Eigen::Index>(views.size()));
    for (std::size_t t = 0; t < views.size(); ++t) {
      rep.col(static_cast<Eigen::Index>(t)) = per_view[t].col(i);
    }
    out.emplace_back(std::move(rep));
  }
  return out;
}

/// max_j |w_j^T F+ w_j - P| over the model's stacked directions.
inline double constraint_residual(const FusionModel& model, const SymMatrix& f_plus) {
  const Matrix w = model.stacked();
  if (w.rows() != f_plus.dim()) throw InvalidInput("constraint_residual: dimension mismatch");
  const auto p = static_cast<double>(model.view_count());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    worst = std::max(worst, std::abs(w.col(j).dot(f_plus.matrix() * w.col(j)) - p));
  }
  return worst;
}

}  // namespace lmcca
