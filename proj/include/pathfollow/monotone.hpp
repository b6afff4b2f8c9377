#pragma once

#include <optional>
#include <vector>

#include "pathfollow/numkit.hpp"

namespace pathfollow {

enum class MapKind { IdealDiode, PracticalDiode, AffineBranch };

/// Which constant the smooth branches of a practical diode attach to.
///   Monotone: F(x) = V2 + sqrt(x) for x > 0, V1 - sqrt(-x) for x < 0.
///   Crossed:  F(x) = V1 + sqrt(x) for x > 0, V2 - sqrt(-x) for x < 0.
/// Both carry the vertical segment [V1, V2] at x = 0. The crossed graph is
/// not monotone, so its resolvent is multivalued on an overlap interval.
enum class BranchOrdering { Monotone, Crossed };

/// One-dimensional set-valued characteristic.
class ScalarMonotoneMap {
 public:
  /// Normal cone of [0, inf): {0} for x > 0, (-inf, 0] at 0, empty for x < 0.
  [[nodiscard]] static ScalarMonotoneMap ideal_diode();
  /// Requires v1 < v2.
  [[nodiscard]] static ScalarMonotoneMap practical_diode(double v1, double v2,
                                                         BranchOrdering ordering = BranchOrdering::Monotone);
  /// Single-valued F(x) = slope * x + offset.
  [[nodiscard]] static ScalarMonotoneMap affine(double slope, double offset);

  [[nodiscard]] MapKind kind() const noexcept { return kind_; }
  [[nodiscard]] double v1() const noexcept { return a_; }
  [[nodiscard]] double v2() const noexcept { return b_; }
  [[nodiscard]] double slope() const noexcept { return a_; }
  [[nodiscard]] double offset() const noexcept { return b_; }
  [[nodiscard]] BranchOrdering ordering() const noexcept { return ordering_; }

  /// Constant attached to the x > 0 branch of a practical diode.
  [[nodiscard]] double positive_offset() const noexcept;
  /// Constant attached to the x < 0 branch of a practical diode.
  [[nodiscard]] double negative_offset() const noexcept;

  [[nodiscard]] bool is_maximal_monotone() const noexcept;

 private:
  ScalarMonotoneMap(MapKind kind, double a, double b, BranchOrdering ordering)
      : kind_(kind), a_(a), b_(b), ordering_(ordering) {}

  MapKind kind_;
  double a_;
  double b_;
  BranchOrdering ordering_;
};

/// Finite nonempty set of one-sided resolvent derivatives, sorted ascending.
using SlopeSet = std::vector<double>;

/// dist(y, F(x)); +inf where F(x) is empty.
[[nodiscard]] double membership_residual(const ScalarMonotoneMap& map, double x, double y);

/// A point x with x + lambda * f = z for some f in F(x). When several
/// branches solve the inclusion the candidate nearest `hint` wins; with no
/// hint the candidate of smallest magnitude wins.
[[nodiscard]] double resolvent(const ScalarMonotoneMap& map, double lambda, double z,
                               std::optional<double> hint = std::nullopt);

/// One-sided derivative limits of the selected resolvent branch at z.
[[nodiscard]] SlopeSet resolvent_slopes(const ScalarMonotoneMap& map, double lambda, double z,
                                        std::optional<double> hint = std::nullopt);

/// Componentwise product of scalar characteristics.
class ProductMap {
 public:
  ProductMap() = default;
  explicit ProductMap(std::vector<ScalarMonotoneMap> components) : components_(std::move(components)) {}

  [[nodiscard]] Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(components_.size()); }
  [[nodiscard]] const ScalarMonotoneMap& operator[](Eigen::Index i) const { return components_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::vector<ScalarMonotoneMap>& components() const noexcept { return components_; }
  [[nodiscard]] bool is_maximal_monotone() const noexcept;

 private:
  std::vector<ScalarMonotoneMap> components_;
};

/// Euclidean norm of the per-coordinate residuals.
[[nodiscard]] double membership_residual(const ProductMap& map, const Vector& x, const Vector& y);

[[nodiscard]] Vector resolvent(const ProductMap& map, double lambda, const Vector& z,
                               const Vector* hint = nullptr);

/// Diagonal slope matrices from the Cartesian product of scalar slope sets,
/// first coordinate varying slowest, capped at 2^n entries.
[[nodiscard]] std::vector<Matrix> resolvent_slopes(const ProductMap& map, double lambda, const Vector& z,
                                                   const Vector* hint = nullptr);

}  // namespace pathfollow
