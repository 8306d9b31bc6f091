#pragma once

// Nearest-neighbor classification on fused representations and the
// accuracy-vs-dimension sweep.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lmcca/errors.hpp"
#include "lmcca/fusion.hpp"

namespace lmcca {

/// kRowSum: sum over canonical variates j of the Euclidean gap between the
/// j-th rows (each a length-P vector). kFlattened: plain Euclidean distance
/// between the representations read as stacked vectors.
enum class DistanceMode { kRowSum, kFlattened };

namespace detail {

inline double row_gap_squared(const Matrix& a, const Matrix& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index t = 0; t < a.cols(); ++t) {
    const double g = a(j, t) - b(j, t);
    s += g * g;
  }
  return s;
}

}  // namespace detail

inline double matrix_distance(const FusedRepresentation& a, const FusedRepresentation& b,
                              DistanceMode mode = DistanceMode::kRowSum) {
  if (a.d() != b.d() || a.views() != b.views()) {
    throw InvalidInput("matrix_distance: shape mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.d(); ++j) {
    const double sq = detail::row_gap_squared(a.values(), b.values(), j);
    sum += mode == DistanceMode::kRowSum ? std::sqrt(sq) : sq;
  }
  return mode == DistanceMode::kRowSum ? sum : std::sqrt(sum);
}

/// Label of the closest training representation; ties go to the smallest
/// training index.
inline int nn_classify(std::span<const FusedRepresentation> train, std::span<const int> labels,
                       const FusedRepresentation& test,
                       DistanceMode mode = DistanceMode::kRowSum) {
  if (train.empty()) throw InvalidInput("nn_classify: empty training set");
  if (labels.size() != train.size()) throw InvalidInput("nn_classify: label count mismatch");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double dist = matrix_distance(test, train[i], mode);
    if (dist < best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  return labels[best];
}

inline double accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw InvalidInput("accuracy: length mismatch");
  if (pred.empty()) throw InvalidInput("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

/// Euclidean 1-NN on raw feature columns (train: m x N_train).
inline std::vector<int> nn_classify_raw(const Matrix& train, std::span<const int> labels,
                                        const Matrix& test) {
  if (train.cols() == 0) throw InvalidInput("nn_classify_raw: empty training set");
  if (static_cast<Eigen::Index>(labels.size()) != train.cols()) {
    throw InvalidInput("nn_classify_raw: label count mismatch");
  }
  if (train.rows() != test.rows()) throw InvalidInput("nn_classify_raw: dimension mismatch");
  std::vector<int> pred;
  pred.reserve(static_cast<std::size_t>(test.cols()));
  for (Eigen::Index k = 0; k < test.cols(); ++k) {
    Eigen::Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < train.cols(); ++i) {
      const double dist = (train.col(i) - test.col(k)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    pred.push_back(labels[static_cast<std::size_t>(best)]);
  }
  return pred;
}

struct SweepPoint {
  Eigen::Index d = 0;
  double accuracy = 0.0;
};

struct SweepCurve {
  std::vector<SweepPoint> points;
  Eigen::Index best_d = 0;
  double best_accuracy = 0.0;

  /// Accuracy at a swept dimension; throws if d was not swept.
  [[nodiscard]] double accuracy_at(Eigen::Index d) const {
    for (const auto& p : points) {
      if (p.d == d) return p.accuracy;
    }
    throw InvalidInput("SweepCurve: d=" + std::to_string(d) + " not in curve");
  }

  /// `d,accuracy` rows plus a trailing `# best_d=<d> best_acc=<a>` line.
  [[nodiscard]] std::string to_csv() const { return to_csv(best_d, best_accuracy); }

  [[nodiscard]] std::string to_csv(Eigen::Index reported_d, double reported_acc) const {
    std::ostringstream os;
    os << "d,accuracy\n" << std::fixed << std::setprecision(6);
    for (const auto& p : points) os << p.d << ',' << p.accuracy << '\n';
    os << "# best_d=" << reported_d << " best_acc=" << reported_acc << '\n';
    return os.str();
  }
};

/// Best point of a curve; ties resolve to the smallest d.
inline void select_best(SweepCurve& curve) {
  curve.best_d = 0;
  curve.best_accuracy = -1.0;
  for (const auto& p : curve.points) {
    if (p.accuracy > curve.best_accuracy) {
      curve.best_accuracy = p.accuracy;
      curve.best_d = p.d;
    }
  }
}

/// Classifies every eval sample against the training samples at each d in
/// d_range (using the leading d directions) and records the accuracy.
///
/// Distances for all d are accumulated in one pass per pair; the partial
/// sums are identical to calling matrix_distance at each d.
inline SweepCurve dimension_sweep(const FusionModel& model, const LabeledMultiviewDataset& train,
                                  const LabeledMultiviewDataset& eval,
                                  std::vector<Eigen::Index> d_range,
                                  DistanceMode mode = DistanceMode::kRowSum) {
  if (d_range.empty()) throw InvalidInput("dimension_sweep: empty d range");
  std::sort(d_range.begin(), d_range.end());
  d_range.erase(std::unique(d_range.begin(), d_range.end()), d_range.end());
  if (d_range.front() < 1 || d_range.back() > model.d()) {
    throw InvalidInput("dimension_sweep: d range must lie in [1, " + std::to_string(model.d()) +
                       "]");
  }
  const Eigen::Index d_max = d_range.back();
  const auto train_rep = project_all(model, train.views(), d_max);
  const auto eval_rep = project_all(model, eval.views(), d_max);

  const std::size_t n_d = d_range.size();
  std::vector<std::size_t> hits(n_d, 0);
  std::vector<double> best_dist(n_d);
  std::vector<int> best_label(n_d);
  std::vector<double> partial(static_cast<std::size_t>(d_max) + 1);

  for (std::size_t k = 0; k < eval_rep.size(); ++k) {
    std::fill(best_dist.begin(), best_dist.end(), std::numeric_limits<double>::infinity());
    std::fill(best_label.begin(), best_label.end(), -1);
    const Matrix& probe = eval_rep[k].values();
    for (std::size_t i = 0; i < train_rep.size(); ++i) {
      const Matrix& ref = train_rep[i].values();
      double sum = 0.0;
      for (Eigen::Index j = 0; j < d_max; ++j) {
        const double sq = detail::row_gap_squared(probe, ref, j);
        sum += mode == DistanceMode::kRowSum ? std::sqrt(sq) : sq;
        partial[static_cast<std::size_t>(j) + 1] = sum;
      }
      for (std::size_t r = 0; r < n_d; ++r) {
        const double s = partial[static_cast<std::size_t>(d_range[r])];
        const double dist = mode == DistanceMode::kRowSum ? s : std::sqrt(s);
        if (dist < best_dist[r]) {
          best_dist[r] = dist;
          best_label[r] = train.labels()[i];
        }
      }
    }
    for (std::size_t r = 0; r < n_d; ++r) {
      if (best_label[r] == eval.labels()[k]) ++hits[r];
    }
  }

  SweepCurve curve;
  for (std::size_t r = 0; r < n_d; ++r) {
    curve.points.push_back(
        {d_range[r], static_cast<double>(hits[r]) / static_cast<double>(eval_rep.size())});
  }
  select_best(curve);
  return curve;
}

/// Sweep over every dimension 1..model.d().
inline SweepCurve full_sweep(const FusionModel& model, const LabeledMultiviewDataset& train,
                             const LabeledMultiviewDataset& eval,
                             DistanceMode mode = DistanceMode::kRowSum) {
  std::vector<Eigen::Index> range(static_cast<std::size_t>(model.d()));
  for (Eigen::Index d = 1; d <= model.d(); ++d) range[static_cast<std::size_t>(d - 1)] = d;
  return dimension_sweep(model, train, eval, std::move(range), mode);
}

/// d chosen on a validation set, with the test accuracy at that d. Both
/// sets are classified against the same reference (training) samples.
struct ValidatedSweep {
  SweepCurve validation;
  SweepCurve test;
  Eigen::Index chosen_d = 0;
  double test_accuracy = 0.0;
};

inline ValidatedSweep validated_sweep(const FusionModel& model, const LabeledMultiviewDataset& train,
                                      const LabeledMultiviewDataset& validation,
                                      const LabeledMultiviewDataset& test,
                                      std::vector<Eigen::Index> d_range,
                                      DistanceMode mode = DistanceMode::kRowSum) {
  ValidatedSweep out;
  out.validation = dimension_sweep(model, train, validation, d_range, mode);
  out.test = dimension_sweep(model, train, test, std::move(d_range), mode);
  out.chosen_d = out.validation.best_d;
  out.test_accuracy = out.test.accuracy_at(out.chosen_d);
  return out;
}

inline std::vector<Eigen::Index> all_dims(Eigen::Index d) {
  std::vector<Eigen::Index> range(static_cast<std::size_t>(d));
  for (Eigen::Index k = 1; k <= d; ++k) range[static_cast<std::size_t>(k - 1)] = k;
  return range;
}

}  // namespace lmcca
