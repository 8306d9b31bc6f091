#pragma once

// Side-by-side evaluation of single views, serial concatenation and the
// four fusion variants on one train/test split.

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lmcca/classify.hpp"
#include "lmcca/fusion.hpp"

namespace lmcca {

struct MethodResult {
  std::string name;
  double best_accuracy = 0.0;
  Eigen::Index best_d = 0;  // 0 when the method has no projected dimension
  Eigen::Index model_d = 0;
  std::optional<SweepCurve> curve;
  std::string error;  // set when the fit failed (degenerate or invalid)
};

struct ComparisonReport {
  std::vector<MethodResult> single_views;
  MethodResult serial;
  std::pair<std::size_t, std::size_t> pair{0, 1};  // views used by CCA and GCCA
  std::vector<MethodResult> fused;                  // cca, gcca, mcca, lmcca
  bool d_on_validation = false;

  [[nodiscard]] const MethodResult& fused_result(Variant v) const {
    for (const auto& r : fused) {
      if (r.name == to_string(v)) return r;
    }
    throw InvalidInput("no result for variant");
  }

  [[nodiscard]] std::string to_text() const {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "single view accuracy\n";
    for (const auto& r : single_views) os << "  " << r.name << "  " << 100.0 * r.best_accuracy << "%\n";
    os << (d_on_validation ? "fusion (test accuracy at the d chosen on validation)\n"
                           : "fusion (best test accuracy over projected dimension)\n");
    os << "  serial  " << 100.0 * serial.best_accuracy << "%  d=---\n";
    for (const auto& r : fused) {
      os << "  " << r.name << "  ";
      if (!r.error.empty()) {
        os << "failed: " << r.error << '\n';
      } else {
        os << 100.0 * r.best_accuracy << "%  d=" << r.best_d << " (of " << r.model_d << ")\n";
      }
    }
    os << "pairwise methods used views " << single_views.at(pair.first).name << " + "
       << single_views.at(pair.second).name << '\n';
    return os.str();
  }
};

inline Matrix stack_views(const LabeledMultiviewDataset& ds) {
  Matrix all(ds.total_dim(), ds.samples());
  Eigen::Index off = 0;
  for (const auto& v : ds.views()) {
    all.middleRows(off, v.dim()) = v.data();
    off += v.dim();
  }
  return all;
}

inline MethodResult evaluate_raw(std::string name, const Matrix& train, const std::vector<int>& train_labels,
                                 const Matrix& test, const std::vector<int>& test_labels) {
  MethodResult r;
  r.name = std::move(name);
  const auto pred = nn_classify_raw(train, train_labels, test);
  r.best_accuracy = accuracy(pred, test_labels);
  return r;
}

/// Fits `variant` on train and sweeps every d on test. With a validation
/// set, d is chosen there and best_accuracy is the test accuracy at that d.
inline MethodResult evaluate_fusion(Variant variant, const LabeledMultiviewDataset& train,
                                    const LabeledMultiviewDataset& test, const FitConfig& cfg,
                                    DistanceMode mode = DistanceMode::kRowSum,
                                    const LabeledMultiviewDataset* validation = nullptr) {
  MethodResult r;
  r.name = std::string(to_string(variant));
  try {
    const FusionModel model = fit(train, variant, cfg);
    r.model_d = model.d();
    if (validation != nullptr) {
      ValidatedSweep vs = validated_sweep(model, train, *validation, test, all_dims(model.d()), mode);
      r.best_d = vs.chosen_d;
      r.best_accuracy = vs.test_accuracy;
      r.curve = std::move(vs.test);
      return r;
    }
    SweepCurve curve = full_sweep(model, train, test, mode);
    r.best_accuracy = curve.best_accuracy;
    r.best_d = curve.best_d;
    r.curve = std::move(curve);
  } catch (const DegenerateFit& e) {
    r.error = e.what();
  }
  return r;
}

/// Runs every baseline and variant. CCA and GCCA take the two views with
/// the best single-view accuracy (ties to the lower index), in view order.
/// Without a validation set the fused d is picked on test.
inline ComparisonReport compare_methods(const LabeledMultiviewDataset& train,
                                        const LabeledMultiviewDataset& test,
                                        const std::vector<std::string>& view_names,
                                        const FitConfig& cfg = {},
                                        DistanceMode mode = DistanceMode::kRowSum,
                                        const LabeledMultiviewDataset* validation = nullptr) {
  ComparisonReport rep;
  rep.d_on_validation = validation != nullptr;
  for (std::size_t t = 0; t < train.view_count(); ++t) {
    const std::string name = t < view_names.size() ? view_names[t] : "view" + std::to_string(t);
    rep.single_views.push_back(evaluate_raw(name, train.view(t).data(), train.labels(),
                                            test.view(t).data(), test.labels()));
  }
  rep.serial = evaluate_raw("serial", stack_views(train), train.labels(), stack_views(test),
                            test.labels());

  std::vector<std::size_t> order(train.view_count());
  for (std::size_t t = 0; t < order.size(); ++t) order[t] = t;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rep.single_views[a].best_accuracy > rep.single_views[b].best_accuracy;
  });
  rep.pair = {std::min(order[0], order[1]), std::max(order[0], order[1])};
  const std::vector<std::size_t> pair_idx{rep.pair.first, rep.pair.second};
  auto pick = [&](const LabeledMultiviewDataset& ds) {
    std::vector<ViewMatrix> views{ds.view(pair_idx[0]), ds.view(pair_idx[1])};
    return LabeledMultiviewDataset(std::move(views), ds.labels(), ds.class_count());
  };
  const auto train_pair = pick(train);
  const auto test_pair = pick(test);
  std::optional<LabeledMultiviewDataset> validation_pair;
  if (validation != nullptr) validation_pair.emplace(pick(*validation));
  const auto* vp = validation_pair ? &*validation_pair : nullptr;

  rep.fused.push_back(evaluate_fusion(Variant::kCca, train_pair, test_pair, cfg, mode, vp));
  rep.fused.push_back(evaluate_fusion(Variant::kGcca, train_pair, test_pair, cfg, mode, vp));
  rep.fused.push_back(evaluate_fusion(Variant::kMcca, train, test, cfg, mode, validation));
  rep.fused.push_back(evaluate_fusion(Variant::kLmcca, train, test, cfg, mode, validation));
  return rep;
}

}  // namespace lmcca
