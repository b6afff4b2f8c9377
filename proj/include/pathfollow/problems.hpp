#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathfollow/monotone.hpp"
#include "pathfollow/numkit.hpp"

namespace pathfollow {

/// t -> x(t). Instances may carry a private warm-start cache and must not be
/// shared between concurrent solves; get a fresh one from make_reference().
using Reference = std::function<Vector(double)>;

/// 0 in g(x(t)) - p(t) + F(x(t)) for t in [0, T].
struct ParametricProblem {
  std::string name;
  Eigen::Index n = 0;
  double horizon = 0.0;  ///< T
  std::function<Vector(const Vector&)> g;
  std::function<Matrix(const Vector&)> jacobian;  ///< nabla g
  std::function<Vector(double)> source;           ///< p
  std::function<Vector(double)> source_rate;      ///< p'
  ProductMap F;
  double lambda = 0.5;        ///< resolvent parameter
  double ell_path = 0.0;      ///< Lipschitz bound of t -> x(t)
  double kappa_subreg = 1.0;  ///< subregularity modulus for the adaptive controller
  double c_mono = 0.0;        ///< strong-monotonicity modulus of g, 0 if unknown
  double box_radius = 1.0;    ///< half-width of the working box around the path
  double oracle_lambda = 0.5; ///< step used by the splitting oracle
  std::function<Reference()> reference_factory;

  [[nodiscard]] bool has_reference() const noexcept { return static_cast<bool>(reference_factory); }
};

/// Sinh resistor with a practical diode V1 = -2, V2 = 1, p(t) = 3 sin t, T = 3.
[[nodiscard]] ParametricProblem make_practical_diode();

/// Asinh resistor with an ideal diode, p(t) = sin(2 pi t), T = 3.
[[nodiscard]] ParametricProblem make_ideal_diode();

/// Ebers-Moll transistor circuit, T = 2 pi. The default g matrix and branch
/// ordering follow the printed circuit data; both can be overridden.
[[nodiscard]] ParametricProblem make_transistor(std::optional<Matrix> g_matrix = std::nullopt,
                                                BranchOrdering ordering = BranchOrdering::Crossed);

/// Linear test instance g(x) = G x, p(t) = p0 + t p1. The reference is the
/// splitting oracle unless F is single-valued everywhere, in which case the
/// affine solve is exact.
[[nodiscard]] ParametricProblem make_affine(Matrix G, Vector p0, Vector p1, ProductMap F, double horizon = 1.0,
                                            double lambda = 0.5);

/// Lookup by CLI name: practical-diode, ideal-diode, transistor.
[[nodiscard]] std::optional<ParametricProblem> make_problem(std::string_view name);
[[nodiscard]] const std::vector<std::string>& problem_names();

/// Fresh reference oracle for one solve; throws NoReference.
[[nodiscard]] Reference make_reference(const ParametricProblem& problem);

/// One-off evaluation with a fresh oracle.
[[nodiscard]] Vector reference_solution(const ParametricProblem& problem, double t);

/// Forward-backward splitting oracle: marches from t = 0 in substeps of at
/// most `max_substep`, iterating x <- (I + mu F)^{-1}(x - mu g(x) + mu p(t))
/// with mu = problem.oracle_lambda until the inclusion residual is at most
/// `tol` (OracleDiverged after `max_iter` sweeps). The previous iterate
/// selects the resolvent branch, so the oracle follows one branch of a
/// hysteretic characteristic. Query times are expected in increasing order;
/// going backwards restarts the march from t = 0.
[[nodiscard]] Reference make_splitting_oracle(const ParametricProblem& problem, double tol = 1e-12,
                                              int max_iter = 100000, std::optional<double> max_substep = std::nullopt);

/// Root of sinh x + branch(x) = p for the practical diode by bisection.
[[nodiscard]] double practical_diode_bisection(double p, double v1, double v2, double tol = 1e-12);

/// dist(p(t) - g(x), F(x)): how far x is from solving the original inclusion.
[[nodiscard]] double inclusion_residual(const ParametricProblem& problem, double t, const Vector& x);

/// Max central-difference slope of the reference over `grid` points, times `safety`.
[[nodiscard]] double estimate_path_lipschitz(const ParametricProblem& problem, int grid = 10000, double safety = 1.1);

}  // namespace pathfollow
