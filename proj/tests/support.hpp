#pragma once

#include <doctest.h>

#include <random>

#include "pathfollow/problems.hpp"

namespace pathfollow::testing {

/// g(x) = 2x, F = {0}, p = 0 on [0, 1].
inline ParametricProblem doubling_problem() {
  return make_affine(2.0 * Matrix::Identity(1, 1), Vector::Zero(1), Vector::Zero(1),
                     ProductMap({ScalarMonotoneMap::affine(0.0, 0.0)}));
}

/// Two-dimensional affine instance with a moving source and affine branches.
inline ParametricProblem affine_pair() {
  Matrix G(2, 2);
  G << 2.0, 0.5, -0.3, 1.5;
  Vector p0(2), p1(2);
  p0 << 0.4, -0.2;
  p1 << 1.0, -2.0;
  return make_affine(G, p0, p1,
                     ProductMap({ScalarMonotoneMap::affine(0.5, 0.1), ScalarMonotoneMap::affine(1.0, -0.3)}));
}

/// The same g and p with F = {0}.
inline ParametricProblem affine_pair_zero_map() {
  Matrix G(2, 2);
  G << 2.0, 0.5, -0.3, 1.5;
  Vector p0(2), p1(2);
  p0 << 0.4, -0.2;
  p1 << 1.0, -2.0;
  return make_affine(G, p0, p1, ProductMap({ScalarMonotoneMap::affine(0.0, 0.0), ScalarMonotoneMap::affine(0.0, 0.0)}));
}

/// Ideal diode with g = 0: whenever z > 0 the only slope is J = 1 and no
/// selection gives an invertible Newton matrix.
inline ParametricProblem gradient_free_diode() {
  ParametricProblem pr = make_ideal_diode();
  pr.g = [](const Vector& x) { return Vector(Vector::Zero(x.size())); };
  pr.jacobian = [](const Vector& x) { return Matrix(Matrix::Zero(x.size(), x.size())); };
  return pr;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace pathfollow::testing
