#pragma once

// The doubled system H(x, d) = (g(x) + F(d), x - d), which turns the
// inclusion into p(t) in H(x(t), d(t)) and makes the set-valued part
// accessible through resolvents.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathfollow/problems.hpp"

namespace pathfollow {

/// Graph point of H - (p(t), 0) produced by one resolvent evaluation.
struct ApproxPoint {
  double t = 0.0;
  Vector x_hat;
  Vector d_hat;
  Vector y_hat;  ///< ((x_hat - d_hat) / lambda, x_hat - d_hat)
  Vector z;      ///< resolvent argument x - lambda g(x) + lambda p(t)
  Vector hint;   ///< branch hint forwarded to the resolvent (may be empty)
};

/// Which row generators built a NewtonSystem.
enum class RowParametrization { Default, Alternate };

/// Row-stacked coderivative pair (M, N) of H at an ApproxPoint.
///
/// Row i is generated by a multiplier m_i (row i of C) and a second-block
/// dual R_i:  y*_1 = J^T m,  y*_2 = R_i,  x*_1 = grad g^T y*_1 + y*_2,
/// x*_2 = (1/lambda)(I - J^T) m - y*_2. N holds the y* rows, M the x* rows.
struct NewtonSystem {
  Matrix M;
  Matrix N;
  Matrix J;
  Matrix C;  ///< multipliers, 2n x n
  Matrix R;  ///< second-block duals, 2n x n
  std::size_t slope_index = 0;
  RowParametrization parametrization = RowParametrization::Default;

  [[nodiscard]] std::string selection_id() const;
};

/// max(dist(p(t) - g(x), F(d)), |x - d|).
[[nodiscard]] double residual(const ParametricProblem& problem, double t, const Vector& x, const Vector& d);

/// d_hat = s_t(x - lambda g(x) + lambda p(t)) with the previous d as hint.
[[nodiscard]] ApproxPoint approx_step(const ParametricProblem& problem, double t, const Vector& x,
                                      const Vector* hint = nullptr);

/// Candidate slope matrices J at the point's resolvent argument.
[[nodiscard]] std::vector<Matrix> slope_candidates(const ParametricProblem& problem, const ApproxPoint& ap);

/// Builds (M, N) for one parametrization without any singularity check.
[[nodiscard]] NewtonSystem build_system(const ParametricProblem& problem, const ApproxPoint& ap, const Matrix& J,
                                        RowParametrization parametrization);

/// First nonsingular system: every parametrization in order, and within it
/// every J in order. Throws AllSingular when none factors.
[[nodiscard]] NewtonSystem assemble_newton(const ParametricProblem& problem, const ApproxPoint& ap,
                                           std::span<const Matrix> slopes);
[[nodiscard]] NewtonSystem assemble_newton(const ParametricProblem& problem, const ApproxPoint& ap, const Matrix& J);
/// Uses slope_candidates(problem, ap).
[[nodiscard]] NewtonSystem assemble_newton(const ParametricProblem& problem, const ApproxPoint& ap);

/// Largest deviation of any row of (M, N) from the coderivative identities.
[[nodiscard]] double structure_defect(const ParametricProblem& problem, const ApproxPoint& ap,
                                      const NewtonSystem& sys);

/// ||M^{-1}|| * ||(M | N)||_F, the regularity product of the system.
[[nodiscard]] double regularity_product(const NewtonSystem& sys);

/// (x+, d+) = (x_hat, d_hat) - M^{-1}(N y_hat - V dt) with V = -N (p'(ap.t), 0).
/// dt = 0 gives the stationary step.
[[nodiscard]] std::pair<Vector, Vector> newton_step(const ParametricProblem& problem, const ApproxPoint& ap,
                                                    const NewtonSystem& sys, double dt);

}  // namespace pathfollow
