#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathfollow/reform.hpp"

namespace pathfollow {

enum class Algorithm { Uniform, Adaptive };

/// Driver settings. The uniform driver reads `steps`; the adaptive driver
/// reads h_max through refine_max.
struct RunConfig {
  Algorithm algorithm = Algorithm::Uniform;
  int steps = 0;            ///< N, grid count
  double h_max = 0.0;       ///< largest trial step
  double backoff = 0.5;     ///< a in (0, 1)
  int max_backoffs = 20;    ///< i_max
  double refine_tol = 1e-10;
  int refine_max = 100000;
  double kappa = 0.0;       ///< subregularity modulus; <= 0 means problem default
  double ell = 0.0;         ///< path Lipschitz constant; <= 0 means problem default
  double tol_zero = 1e-12;  ///< early-exit residual
  bool drift = false;       ///< apply the p' drift term in single steps
  double ell_hat_factor = std::numbers::sqrt2;
};

struct StepRecord {
  int k = 0;
  double t = 0.0;
  Vector x;
  Vector d;
  double residual = 0.0;
  std::optional<double> err;
  std::optional<double> c_k;
  std::optional<double> h;
  int refinements = 0;
  std::string slope_branch;  ///< selection id, "copy" for early exits
};

struct Failure {
  ErrorKind kind;
  std::string message;
};

struct TrajectorySummary {
  double max_residual = 0.0;
  std::optional<double> max_err;
  int total_refinements = 0;
  double wall_seconds = 0.0;
};

struct Trajectory {
  std::vector<StepRecord> records;
  TrajectorySummary summary;
  std::optional<Failure> failure;

  [[nodiscard]] bool ok() const noexcept { return !failure.has_value(); }
};

/// The splitting map (s(x - lambda g(x) + lambda p(t)), d - lambda (d - x)),
/// with d as the branch hint.
[[nodiscard]] std::pair<Vector, Vector> forward_backward(const ParametricProblem& problem, double t, const Vector& x,
                                                         const Vector& d);

struct RefineResult {
  Vector x;
  Vector d;
  int iterations = 0;
};

/// Iterates forward_backward until residual <= target; RefineDiverged at cap.
[[nodiscard]] RefineResult refine(const ParametricProblem& problem, double t, Vector x, Vector d, double target,
                                  int cap);

/// One drift-corrected step from (x_bar, d_bar) at t to time s.
[[nodiscard]] std::pair<Vector, Vector> single_step(const ParametricProblem& problem, double t, double s,
                                                    const Vector& x_bar, const Vector& d_bar, bool drift = true,
                                                    double tol_zero = 1e-12);

/// kappa * y_norm <= max(c_k, h) / 2 + ell * h.
[[nodiscard]] constexpr bool accept_step(double kappa, double ell, double c_k, double h, double y_norm) noexcept {
  return kappa * y_norm <= 0.5 * (c_k > h ? c_k : h) + ell * h;
}

/// max(c_prev, h) / 2 + ell * h.
[[nodiscard]] constexpr double ck_update(double c_prev, double ell, double h) noexcept {
  return 0.5 * (c_prev > h ? c_prev : h) + ell * h;
}

/// Uniform grid h = T / N, one Newton step per node. x0 defaults to x(0).
[[nodiscard]] Trajectory uniform_path_follow(const ParametricProblem& problem, const RunConfig& config,
                                             std::optional<Vector> x0 = std::nullopt);

/// Adaptive steps t + a^i h_max accepted by the error ledger, with
/// forward-backward refinement when no trial step passes.
[[nodiscard]] Trajectory adaptive_path_follow(const ParametricProblem& problem, const RunConfig& config,
                                              std::optional<Vector> x0 = std::nullopt);

/// Dispatches on config.algorithm.
[[nodiscard]] Trajectory path_follow(const ParametricProblem& problem, const RunConfig& config,
                                     std::optional<Vector> x0 = std::nullopt);

}  // namespace pathfollow
