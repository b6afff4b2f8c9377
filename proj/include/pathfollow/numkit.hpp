#pragma once

// Small dense linear algebra on top of Eigen. Everything here is a free
// function over Eigen expressions so callers can pass blocks, products and
// maps without materializing temporaries.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>

#include "pathfollow/error.hpp"

namespace pathfollow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Relative pivot threshold below which a factorization is reported singular.
inline constexpr double kSingularPivotRatio = 1e-12;

/// Partial-pivoting LU factor of a square matrix with a deterministic
/// singularity verdict: the factor exists only if every pivot of U is at
/// least kSingularPivotRatio times the largest entry of the input.
template <typename Scalar>
class DenseLu {
 public:
  template <typename Derived>
  static std::optional<DenseLu> factor(const Eigen::MatrixBase<Derived>& m) {
    if (m.rows() != m.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "LU factor of a non-square matrix");
    }
    DenseLu lu;
    lu.lu_.compute(m);
    const Scalar scale = m.cwiseAbs().maxCoeff();
    if (m.size() == 0) return lu;
    if (!(scale > Scalar(0))) return std::nullopt;
    const Scalar min_pivot = lu.lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot >= Scalar(kSingularPivotRatio) * scale)) return std::nullopt;
    return lu;
  }

  template <typename Derived>
  [[nodiscard]] VectorX<Scalar> solve(const Eigen::MatrixBase<Derived>& b) const {
    if (b.rows() != lu_.rows()) {
      throw Error(ErrorKind::DimensionMismatch, "right-hand side length does not match matrix");
    }
    return lu_.solve(b);
  }

  [[nodiscard]] MatrixX<Scalar> inverse() const { return lu_.inverse(); }

 private:
  DenseLu() = default;
  Eigen::PartialPivLU<MatrixX<Scalar>> lu_;
};

template <typename Derived>
[[nodiscard]] std::optional<DenseLu<typename Derived::Scalar>> lu_factor(
    const Eigen::MatrixBase<Derived>& m) {
  return DenseLu<typename Derived::Scalar>::factor(m);
}

/// Solves m x = b; throws Error(Singular) when the pivot test fails.
template <typename DerivedM, typename DerivedB>
[[nodiscard]] VectorX<typename DerivedM::Scalar> lu_solve(const Eigen::MatrixBase<DerivedM>& m,
                                                          const Eigen::MatrixBase<DerivedB>& b) {
  if (m.rows() != m.cols() || b.rows() != m.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "lu_solve shape mismatch");
  }
  auto lu = lu_factor(m);
  if (!lu) throw Error(ErrorKind::Singular, "pivot below relative threshold");
  return lu->solve(b);
}

template <typename Derived>
[[nodiscard]] typename Derived::Scalar frobenius_norm(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

/// Largest singular value by power iteration on mᵀm (at most 200 sweeps).
template <typename Derived>
[[nodiscard]] typename Derived::Scalar operator_norm_estimate(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  if (m.size() == 0) return Scalar(0);
  const MatrixX<Scalar> gram = m.transpose() * m;
  // Deterministic start with every component nonzero.
  VectorX<Scalar> v(gram.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Scalar(1) + Scalar(i) / Scalar(v.size() + 1);
  v.normalize();
  Scalar sigma2 = Scalar(0);
  for (int it = 0; it < 200; ++it) {
    VectorX<Scalar> w = gram * v;
    const Scalar norm = w.norm();
    if (norm == Scalar(0)) return Scalar(0);
    const Scalar next = v.dot(w);
    v = w / norm;
    if (it > 2 && std::abs(next - sigma2) <= Scalar(1e-15) * std::max(Scalar(1), next)) {
      sigma2 = next;
      break;
    }
    sigma2 = next;
  }
  return std::sqrt(std::max(sigma2, Scalar(0)));
}

}  // namespace pathfollow
