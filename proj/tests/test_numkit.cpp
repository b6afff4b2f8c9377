#include <doctest.h>

#include <random>

#include "pathfollow/numkit.hpp"

using namespace pathfollow;

TEST_CASE("lu_solve on identity and diagonal systems") {
  Vector b(2);
  b << 3.0, -1.0;
  CHECK(lu_solve(Matrix::Identity(2, 2), b).isApprox(b));

  Matrix D = Vector((Vector(2) << 2.0, 4.0).finished()).asDiagonal();
  const Vector x = lu_solve(D, Vector((Vector(2) << 2.0, 4.0).finished()));
  CHECK(x(0) == doctest::Approx(1.0));
  CHECK(x(1) == doctest::Approx(1.0));
}

TEST_CASE("lu_solve reports a rank-one matrix as singular") {
  Matrix m(2, 2);
  m << 1.0, 1.0, 1.0, 1.0;
  try {
    (void)lu_solve(m, Vector((Vector(2) << 1.0, 2.0).finished()));
    FAIL("expected Singular");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Singular);
  }
  CHECK_FALSE(lu_factor(m).has_value());
  CHECK_FALSE(lu_factor(Matrix::Zero(3, 3)).has_value());
}

TEST_CASE("pivot threshold is relative to the largest entry") {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, 1e-13;
  CHECK_FALSE(lu_factor(m).has_value());
  m(1, 1) = 1e-11;
  CHECK(lu_factor(m).has_value());
  // Uniform scaling never changes the verdict.
  CHECK(lu_factor(Matrix(m * 1e-20)).has_value());
  CHECK_FALSE(lu_factor(Matrix((Matrix(2, 2) << 1e-20, 0.0, 0.0, 1e-33).finished())).has_value());
}

TEST_CASE("lu_solve rejects mismatched shapes") {
  CHECK_THROWS_AS((void)lu_solve(Matrix::Identity(2, 3), Vector::Ones(2)), Error);
  try {
    (void)lu_solve(Matrix::Identity(2, 2), Vector::Ones(3));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("lu_solve accepts Eigen expressions") {
  Matrix big = Matrix::Identity(4, 4) * 3.0;
  const Vector x = lu_solve(big.topLeftCorner(2, 2), Vector::Ones(4).head(2));
  CHECK(x.isApprox(Vector::Constant(2, 1.0 / 3.0)));
}

TEST_CASE("frobenius_norm examples") {
  CHECK(frobenius_norm(Matrix::Identity(2, 2)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(frobenius_norm(Matrix::Zero(2, 3)) == 0.0);
  Matrix m(2, 2);
  m << 3.0, 4.0, 0.0, 0.0;
  CHECK(frobenius_norm(m) == doctest::Approx(5.0));
}

TEST_CASE("operator_norm_estimate examples") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 3.0;
  CHECK(operator_norm_estimate(d) == doctest::Approx(3.0).epsilon(0.01));
  CHECK(operator_norm_estimate(Matrix::Identity(5, 5)) == doctest::Approx(1.0).epsilon(1e-12));
  Matrix shift(2, 2);
  shift << 0.0, 1.0, 0.0, 0.0;
  CHECK(operator_norm_estimate(shift) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(operator_norm_estimate(Matrix::Zero(3, 3)) == 0.0);
}

TEST_CASE("random well-conditioned systems are solved accurately") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 16);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = dim(rng);
    Matrix m(n, n);
    for (auto& v : m.reshaped()) v = u(rng);
    Eigen::JacobiSVD<Matrix> svd(m);
    const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
    if (!(cond <= 1e6)) continue;
    Vector x(n);
    for (auto& v : x) v = u(rng);
    const Vector b = m * x;
    const Vector sol = lu_solve(m, b);
    CHECK((m * sol - b).norm() <= 1e-9 * std::max(1.0, b.norm()));
    CHECK((sol - x).norm() <= 1e-9 * x.norm());
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("operator norm agrees with SVD and never exceeds the Frobenius norm") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 8;
    Matrix m(n, n);
    for (auto& v : m.reshaped()) v = u(rng);
    const double sigma = Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
    const double est = operator_norm_estimate(m);
    CHECK(est == doctest::Approx(sigma).epsilon(0.01));
    CHECK(frobenius_norm(m) >= est * 0.99);
  }
}

TEST_CASE("DenseLu inverse matches the exact inverse") {
  Matrix m(2, 2);
  m << 4.0, 1.0, 2.0, 3.0;
  const auto lu = lu_factor(m);
  REQUIRE(lu.has_value());
  Matrix expected(2, 2);
  expected << 0.3, -0.1, -0.2, 0.4;
  CHECK(lu->inverse().isApprox(expected, 1e-14));
}
