#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lmcca/fusion.hpp"
#include "lmcca/linalg.hpp"

namespace fixture {

using lmcca::Matrix;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Matrix matrix(Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal();
    }
    return m;
  }
  Matrix symmetric(Eigen::Index n) {
    const Matrix m = matrix(n, n);
    return 0.5 * (m + m.transpose());
  }
  Matrix spd(Eigen::Index n) {
    const Matrix m = matrix(n, n);
    return m * m.transpose() + 0.5 * Matrix::Identity(n, n);
  }

  /// Random labeled dataset with every class present; class means are
  /// shifted so the labels carry signal.
  lmcca::LabeledMultiviewDataset dataset(const std::vector<int>& dims, int classes, int n) {
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < classes ? i : integer(0, classes - 1);
    std::vector<lmcca::ViewMatrix> views;
    for (int m : dims) {
      Matrix shift = matrix(m, classes);
      Matrix x = matrix(m, n);
      for (int i = 0; i < n; ++i) x.col(i) += shift.col(labels[static_cast<std::size_t>(i)]);
      views.emplace_back(std::move(x));
    }
    return {std::move(views), std::move(labels), classes};
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace fixture
