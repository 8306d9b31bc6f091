#pragma once

// Dense symmetric linear algebra used by the fusion solver: symmetric
// eigendecomposition, symmetric-definite generalized eigenproblems by
// Cholesky reduction, identity-shift regularization and numerical rank.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "lmcca/errors.hpp"

namespace lmcca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Square real matrix that is exactly symmetric and finite.
///
/// Construction accepts inputs whose asymmetry is at rounding level
/// (|a_ij - a_ji| <= 1e-10 * max|a|) and averages the two triangles, so
/// products like X * X^T can be wrapped directly. Anything further from
/// symmetric is rejected.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw InvalidInput("SymMatrix: matrix is " + std::to_string(m_.rows()) + "x" +
                         std::to_string(m_.cols()) + ", expected square");
    }
    if (!m_.allFinite()) throw InvalidInput("SymMatrix: non-finite entries");
    const double scale = m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff();
    const double tol = 1e-10 * scale;
    const Eigen::Index n = m_.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j + 1; i < n; ++i) {
        if (std::abs(m_(i, j) - m_(j, i)) > tol) {
          throw InvalidInput("SymMatrix: matrix is not symmetric");
        }
        const double avg = 0.5 * (m_(i, j) + m_(j, i));
        m_(i, j) = avg;
        m_(j, i) = avg;
      }
    }
  }

  static SymMatrix identity(Eigen::Index n) { return SymMatrix(Matrix::Identity(n, n)); }
  static SymMatrix zero(Eigen::Index n) { return SymMatrix(Matrix::Zero(n, n)); }
  static SymMatrix diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

  [[nodiscard]] Eigen::Index dim() const { return m_.rows(); }
  [[nodiscard]] const Matrix& matrix() const { return m_; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  [[nodiscard]] double trace() const { return m_.trace(); }

 private:
  Matrix m_;
};

/// Eigenpairs of A x = lambda B x, eigenvalues descending.
struct GevSolution {
  Vector eigenvalues;
  Matrix eigenvectors;  // one column per eigenvalue
  Vector b_norms;       // x^T B x per column
};

namespace detail {

// Largest-magnitude component positive; ties resolve to the lowest index.
inline void fix_signs(Matrix& vecs) {
  for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < vecs.rows(); ++i) {
      const double a = std::abs(vecs(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (vecs.rows() > 0 && vecs(best, j) < 0.0) vecs.col(j) *= -1.0;
  }
}

// Eigen returns ascending order; flip to descending.
inline void to_descending(Vector& vals, Matrix& vecs) {
  vals.reverseInPlace();
  vecs.rowwise().reverseInPlace();
}

}  // namespace detail

/// Full spectrum of a symmetric matrix, descending, orthonormal eigenvectors.
inline GevSolution sym_eig(const SymMatrix& a) {
  GevSolution out;
  if (a.dim() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw InvalidInput("sym_eig: eigensolver did not converge");
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  detail::to_descending(out.eigenvalues, out.eigenvectors);
  detail::fix_signs(out.eigenvectors);
  out.b_norms = Vector::Ones(a.dim());
  return out;
}

/// Solves A x = lambda B x for symmetric A and symmetric positive definite B.
///
/// B = L L^T is factored, the standard problem L^-1 A L^-T y = lambda y is
/// solved, and x = L^-T y. Eigenvectors come out B-orthonormal before the
/// sign convention is applied.
inline GevSolution sym_def_gev(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw InvalidInput("sym_def_gev: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                       std::to_string(b.dim()));
  }
  GevSolution out;
  if (a.dim() == 0) return out;

  Eigen::LLT<Matrix> llt(b.matrix());
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("sym_def_gev: Cholesky factorization of B failed");
  }
  const auto lower = llt.matrixL();
  const Matrix w = lower.solve(a.matrix());                    // L^-1 A
  Matrix c = lower.solve(w.transpose()).transpose();           // L^-1 A L^-T
  c = 0.5 * (c + c.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(c, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw InvalidInput("sym_def_gev: eigensolver did not converge");
  }
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = llt.matrixU().solve(solver.eigenvectors());  // L^-T y
  detail::to_descending(out.eigenvalues, out.eigenvectors);
  detail::fix_signs(out.eigenvectors);
  out.b_norms = (out.eigenvectors.transpose() * b.matrix() * out.eigenvectors).diagonal();
  return out;
}

/// Policy for shifting a (near-)singular PSD block to positive definite.
struct Regularization {
  double rel_scale = 1e-4;
  double abs_floor = 1e-12;
  /// Ratio of extreme eigenvalues above which a block counts as singular.
  double condition_limit = 1e12;
};

/// Returns F unchanged when its condition estimate is within the limit,
/// otherwise F + rho I with rho = max(rel_scale * trace(F) / dim, abs_floor).
inline SymMatrix regularize(const SymMatrix& f, const Regularization& reg = {}) {
  if (!(reg.rel_scale >= 0.0) || !(reg.abs_floor > 0.0)) {
    throw InvalidInput("regularize: need rel_scale >= 0 and abs_floor > 0");
  }
  const Eigen::Index n = f.dim();
  if (n == 0) return f;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(f.matrix(), Eigen::EigenvaluesOnly);
  const double lo = solver.eigenvalues()(0);
  const double hi = solver.eigenvalues()(n - 1);
  if (lo > 0.0 && hi / lo <= reg.condition_limit) return f;

  const double rho = std::max(reg.rel_scale * f.trace() / static_cast<double>(n), reg.abs_floor);
  Matrix shifted = f.matrix();
  shifted.diagonal().array() += rho;
  return SymMatrix(std::move(shifted));
}

inline SymMatrix regularize(const SymMatrix& f, double rel_scale, double abs_floor) {
  Regularization reg;
  reg.rel_scale = rel_scale;
  reg.abs_floor = abs_floor;
  return regularize(f, reg);
}

/// Raw-matrix overload; rejects non-symmetric input.
inline SymMatrix regularize(const Matrix& f, double rel_scale, double abs_floor) {
  return regularize(SymMatrix(f), rel_scale, abs_floor);
}

/// Number of eigenvalues above tol_rel times the largest one.
inline int rank_estimate(const SymMatrix& a, double tol_rel = 1e-10) {
  if (a.dim() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  const Vector& ev = solver.eigenvalues();
  const double top = ev(ev.size() - 1);
  if (!(top > 0.0)) return 0;
  const double cut = tol_rel * top;
  return static_cast<int>((ev.array() > cut).count());
}

/// ||A x - lambda B x|| / ((||A|| + |lambda| ||B||) ||x||), Frobenius norms
/// for the matrices. Zero when the denominator vanishes.
inline double gev_relative_residual(const Matrix& a, const Matrix& b, double lambda,
                                    const Vector& x) {
  const double denom = (a.norm() + std::abs(lambda) * b.norm()) * x.norm();
  if (denom == 0.0) return 0.0;
  return (a * x - lambda * (b * x)).norm() / denom;
}

}  // namespace lmcca
