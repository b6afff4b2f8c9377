#include "pathfollow/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace pathfollow {

namespace {

struct StepOutcome {
  Vector x;
  Vector d;
  std::string branch;
};

StepOutcome step_with_branch(const ParametricProblem& problem, double t, double s, const Vector& x_bar,
                             const Vector& d_bar, bool drift, double tol_zero) {
  if (residual(problem, s, x_bar, d_bar) <= tol_zero) return {x_bar, d_bar, "copy"};
  const ApproxPoint ap = approx_step(problem, s, x_bar, &d_bar);
  const auto slopes = slope_candidates(problem, ap);
  const NewtonSystem sys = assemble_newton(problem, ap, std::span<const Matrix>(slopes));
  auto [x, d] = newton_step(problem, ap, sys, drift ? s - t : 0.0);
  if (!x.allFinite() || !d.allFinite()) {
    throw Error(ErrorKind::Singular, "non-finite Newton iterate at t = " + std::to_string(s));
  }
  return {std::move(x), std::move(d), sys.selection_id()};
}

class Recorder {
 public:
  Recorder(const ParametricProblem& problem, Trajectory& traj)
      : problem_(problem), traj_(traj), start_(std::chrono::steady_clock::now()) {
    if (problem.has_reference()) ref_ = make_reference(problem);
  }

  [[nodiscard]] Vector initial_point(std::optional<Vector> x0) {
    if (x0) {
      if (x0->size() != problem_.n) throw Error(ErrorKind::DimensionMismatch, "x0 has the wrong length");
      return *x0;
    }
    if (!ref_) throw Error(ErrorKind::NoReference, "no x0 given and " + problem_.name + " has no reference");
    return ref_(0.0);
  }

  void push(double t, const Vector& x, const Vector& d, double res, std::optional<double> c_k = std::nullopt,
            std::optional<double> h = std::nullopt, int refinements = 0, std::string branch = {}) {
    StepRecord rec;
    rec.t = t;
    rec.x = x;
    rec.d = d;
    rec.residual = res;
    rec.c_k = c_k;
    rec.h = h;
    rec.refinements = refinements;
    rec.slope_branch = std::move(branch);
    rec.k = static_cast<int>(traj_.records.size());
    if (ref_) {
      try {
        rec.err = (rec.x - ref_(rec.t)).norm();
      } catch (const Error&) {
        rec.err.reset();
      }
    }
    auto& sum = traj_.summary;
    sum.max_residual = std::max(sum.max_residual, rec.residual);
    if (rec.err) sum.max_err = std::max(sum.max_err.value_or(0.0), *rec.err);
    sum.total_refinements += rec.refinements;
    traj_.records.push_back(std::move(rec));
  }

  void fail(const Error& e) { traj_.failure = Failure{e.kind(), e.what()}; }

  void finish() {
    traj_.summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  const ParametricProblem& problem_;
  Trajectory& traj_;
  Reference ref_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

std::pair<Vector, Vector> forward_backward(const ParametricProblem& problem, double t, const Vector& x,
                                           const Vector& d) {
  const double lambda = problem.lambda;
  const Vector z = x - lambda * problem.g(x) + lambda * problem.source(t);
  return {resolvent(problem.F, lambda, z, &d), d - lambda * (d - x)};
}

RefineResult refine(const ParametricProblem& problem, double t, Vector x, Vector d, double target, int cap) {
  if (!(target > 0.0)) throw Error(ErrorKind::InvalidArgument, "refinement target must be positive");
  for (int it = 0;; ++it) {
    if (residual(problem, t, x, d) <= target) return {std::move(x), std::move(d), it};
    if (it >= cap) break;
    std::tie(x, d) = forward_backward(problem, t, x, d);
    if (!x.allFinite() || !d.allFinite()) break;
  }
  throw Error(ErrorKind::RefineDiverged,
              "forward-backward missed residual " + std::to_string(target) + " within " + std::to_string(cap) +
                  " iterations at t = " + std::to_string(t));
}

std::pair<Vector, Vector> single_step(const ParametricProblem& problem, double t, double s, const Vector& x_bar,
                                      const Vector& d_bar, bool drift, double tol_zero) {
  if (!(t < s)) throw Error(ErrorKind::InvalidArgument, "single_step needs t < s");
  auto out = step_with_branch(problem, t, s, x_bar, d_bar, drift, tol_zero);
  return {std::move(out.x), std::move(out.d)};
}

Trajectory uniform_path_follow(const ParametricProblem& problem, const RunConfig& config, std::optional<Vector> x0) {
  if (config.steps < 1) throw Error(ErrorKind::InvalidArgument, "uniform driver needs steps >= 1");
  Trajectory traj;
  Recorder rec(problem, traj);
  Vector x = rec.initial_point(std::move(x0));
  Vector d = x;
  rec.push(0.0, x, d, residual(problem, 0.0, x, d));

  const int n_steps = config.steps;
  const double h = problem.horizon / n_steps;
  for (int k = 0; k < n_steps; ++k) {
    const double t_next = k + 1 == n_steps ? problem.horizon : (k + 1) * h;
    const double r = residual(problem, t_next, x, d);
    std::string branch = "copy";
    if (r > config.tol_zero) {
      try {
        // Stationary step: the node value x(t_next) is the target.
        auto out = step_with_branch(problem, t_next - h, t_next, x, d, false, config.tol_zero);
        x = std::move(out.x);
        d = std::move(out.d);
        branch = std::move(out.branch);
      } catch (const Error& e) {
        rec.fail(e);
        break;
      }
    }
    const double r_after = branch == "copy" ? r : residual(problem, t_next, x, d);
    rec.push(t_next, x, d, r_after, std::nullopt, t_next - traj.records.back().t, 0, branch);
  }
  rec.finish();
  return traj;
}

Trajectory adaptive_path_follow(const ParametricProblem& problem, const RunConfig& config, std::optional<Vector> x0) {
  const double T = problem.horizon;
  if (!(config.h_max > 0.0) || config.h_max > T) throw Error(ErrorKind::InvalidArgument, "need 0 < h_max <= T");
  if (!(config.backoff > 0.0 && config.backoff < 1.0)) throw Error(ErrorKind::InvalidArgument, "need 0 < a < 1");
  if (config.max_backoffs < 0) throw Error(ErrorKind::InvalidArgument, "need i_max >= 0");
  const double kappa = config.kappa > 0.0 ? config.kappa : problem.kappa_subreg;
  const double ell = config.ell > 0.0 ? config.ell : problem.ell_path;
  const double ell_hat = config.ell_hat_factor * ell;
  const double refine_target = config.refine_tol / kappa;

  Trajectory traj;
  Recorder rec(problem, traj);
  Vector x = rec.initial_point(std::move(x0));
  Vector d = x;
  double t = 0.0;
  double c = 0.0;  // c_0 = 0 certifies an exact start
  int pending = 0;

  // The ledger claims error <= c; when the certified bound kappa * residual
  // exceeds it, refine before stepping on.
  auto ledger_guard = [&] {
    if (kappa * residual(problem, t, x, d) <= std::max(c, config.refine_tol)) return;
    auto r = refine(problem, t, x, d, refine_target, config.refine_max);
    x = std::move(r.x);
    d = std::move(r.d);
    pending += r.iterations;
    c = kappa * residual(problem, t, x, d);
  };

  try {
    ledger_guard();
  } catch (const Error& e) {
    rec.fail(e);
    rec.finish();
    return traj;
  }
  rec.push(t, x, d, residual(problem, t, x, d), c, std::nullopt, pending);
  pending = 0;

  try {
    while (t < T) {
      ledger_guard();
      bool refined = false;
      for (;;) {
        bool accepted = false;
        double trial = config.h_max;
        for (int i = 0; i <= config.max_backoffs; ++i, trial *= config.backoff) {
          // Within a few ulps of T the remaining sliver is rounding, not a step.
          const double s = t + trial >= T - 8.0 * std::numeric_limits<double>::epsilon() * T ? T : t + trial;
          const double h = s - t;
          if (!(h > 0.0)) break;
          StepOutcome cand;
          try {
            cand = step_with_branch(problem, t, s, x, d, config.drift, config.tol_zero);
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::AllSingular && e.kind() != ErrorKind::NoSolution &&
                e.kind() != ErrorKind::Singular) {
              throw;
            }
            continue;  // rejected trial
          }
          const double y_norm = residual(problem, s, cand.x, cand.d);
          if (!accept_step(kappa, ell, c, h, y_norm)) continue;
          t = s;
          x = std::move(cand.x);
          d = std::move(cand.d);
          c = ck_update(c, ell_hat, h);
          rec.push(t, x, d, y_norm, c, h, pending, std::move(cand.branch));
          pending = 0;
          accepted = true;
          break;
        }
        if (accepted) break;
        if (refined) {
          throw Error(ErrorKind::Stalled, "no trial step accepted after refinement at t = " + std::to_string(t));
        }
        auto r = refine(problem, t, x, d, refine_target, config.refine_max);
        x = std::move(r.x);
        d = std::move(r.d);
        pending += r.iterations;
        c = kappa * residual(problem, t, x, d);
        refined = true;
      }
    }
  } catch (const Error& e) {
    rec.fail(e);
  }
  rec.finish();
  return traj;
}

Trajectory path_follow(const ParametricProblem& problem, const RunConfig& config, std::optional<Vector> x0) {
  return config.algorithm == Algorithm::Uniform ? uniform_path_follow(problem, config, std::move(x0))
                                                : adaptive_path_follow(problem, config, std::move(x0));
}

}  // namespace pathfollow
