#include "pathfollow/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace pathfollow {

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }
Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

// Marching forward-backward solver. Owned by a single Reference instance.
class SplittingOracle {
 public:
  SplittingOracle(ParametricProblem problem, double tol, int max_iter, double max_substep)
      : problem_(std::move(problem)), tol_(tol), max_iter_(max_iter), max_substep_(max_substep) {}

  Vector operator()(double t) {
    if (!started_ || t < t_) {
      x_ = solve_at(0.0, Vector::Zero(problem_.n));
      t_ = 0.0;
      started_ = true;
    }
    const double span = t - t_;
    if (span > 0.0) {
      const int sub = std::max(1, static_cast<int>(std::ceil(span / max_substep_)));
      for (int j = 1; j <= sub; ++j) {
        const double tau = j == sub ? t : t_ + span * static_cast<double>(j) / static_cast<double>(sub);
        x_ = solve_at(tau, x_);
      }
      t_ = t;
    }
    return x_;
  }

 private:
  Vector solve_at(double t, Vector x) const {
    const double mu = problem_.oracle_lambda;
    for (int it = 0; it <= max_iter_; ++it) {
      if (inclusion_residual(problem_, t, x) <= tol_) return x;
      const Vector z = x - mu * problem_.g(x) + mu * problem_.source(t);
      x = resolvent(problem_.F, mu, z, &x);
      if (!x.allFinite()) break;
    }
    throw Error(ErrorKind::OracleDiverged, problem_.name + " splitting oracle missed tolerance at t = " + std::to_string(t));
  }

  ParametricProblem problem_;
  double tol_;
  int max_iter_;
  double max_substep_;
  bool started_ = false;
  double t_ = 0.0;
  Vector x_;
};

}  // namespace

double inclusion_residual(const ParametricProblem& problem, double t, const Vector& x) {
  return membership_residual(problem.F, x, problem.source(t) - problem.g(x));
}

Reference make_splitting_oracle(const ParametricProblem& problem, double tol, int max_iter,
                                std::optional<double> max_substep) {
  // The copy drops the factory so the oracle does not hold itself alive.
  ParametricProblem copy = problem;
  copy.reference_factory = nullptr;
  const double step = max_substep.value_or(problem.horizon / 4096.0);
  auto oracle = std::make_shared<SplittingOracle>(std::move(copy), tol, max_iter, step);
  return [oracle](double t) { return (*oracle)(t); };
}

double practical_diode_bisection(double p, double v1, double v2, double tol) {
  if (p >= v1 && p <= v2) return 0.0;
  // Both branch functions are strictly increasing on their half-lines.
  std::function<double(double)> f;
  double lo = 0.0;
  double hi = 0.0;
  if (p > v2) {
    f = [=](double x) { return std::sinh(x) + v2 + std::sqrt(x) - p; };
    hi = std::asinh(p - v2);
  } else {
    f = [=](double x) { return std::sinh(x) + v1 - std::sqrt(-x) - p; };
    lo = std::asinh(p - v1);
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  const double root = std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
  if (!(std::abs(f(root)) <= tol)) {
    throw Error(ErrorKind::OracleDiverged, "bisection residual above tolerance for p = " + std::to_string(p));
  }
  return root;
}

double estimate_path_lipschitz(const ParametricProblem& problem, int grid, double safety) {
  Reference ref = make_reference(problem);
  const double dt = problem.horizon / grid;
  Vector prev = ref(0.0);
  double best = 0.0;
  for (int i = 1; i <= grid; ++i) {
    const double t = i == grid ? problem.horizon : i * dt;
    Vector cur = ref(t);
    best = std::max(best, (cur - prev).norm() / dt);
    prev = std::move(cur);
  }
  return best * safety;
}

ParametricProblem make_practical_diode() {
  constexpr double v1 = -2.0;
  constexpr double v2 = 1.0;
  ParametricProblem pr;
  pr.name = "practical-diode";
  pr.n = 1;
  pr.horizon = 3.0;
  pr.g = [](const Vector& x) { return scalar(std::sinh(x(0))); };
  pr.jacobian = [](const Vector& x) { return scalar_matrix(std::cosh(x(0))); };
  pr.source = [](double t) { return scalar(3.0 * std::sin(t)); };
  pr.source_rate = [](double t) { return scalar(3.0 * std::cos(t)); };
  pr.F = ProductMap({ScalarMonotoneMap::practical_diode(v1, v2, BranchOrdering::Monotone)});
  pr.lambda = 0.5;
  pr.c_mono = 1.0;  // cosh >= 1
  pr.kappa_subreg = 3.0;
  pr.box_radius = 1.0;
  pr.oracle_lambda = 0.5;
  pr.reference_factory = [] {
    return Reference([](double t) { return scalar(practical_diode_bisection(3.0 * std::sin(t), v1, v2)); });
  };
  pr.ell_path = estimate_path_lipschitz(pr);
  return pr;
}

ParametricProblem make_ideal_diode() {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  ParametricProblem pr;
  pr.name = "ideal-diode";
  pr.n = 1;
  pr.horizon = 3.0;
  pr.g = [](const Vector& x) { return scalar(std::asinh(x(0))); };
  pr.jacobian = [](const Vector& x) { return scalar_matrix(1.0 / std::sqrt(1.0 + x(0) * x(0))); };
  pr.source = [](double t) { return scalar(std::sin(two_pi * t)); };
  pr.source_rate = [](double t) { return scalar(two_pi * std::cos(two_pi * t)); };
  pr.F = ProductMap({ScalarMonotoneMap::ideal_diode()});
  pr.lambda = 0.5;
  pr.ell_path = two_pi * std::cosh(1.0);
  pr.kappa_subreg = 3.0;
  pr.box_radius = 1.5;
  pr.c_mono = 1.0 / std::sqrt(1.0 + pr.box_radius * pr.box_radius);
  pr.oracle_lambda = 0.9;
  pr.reference_factory = [] {
    return Reference([](double t) { return scalar(std::sinh(std::max(std::sin(two_pi * t), 0.0))); });
  };
  return pr;
}

ParametricProblem make_transistor(std::optional<Matrix> g_matrix, BranchOrdering ordering) {
  constexpr double ve1 = -3.0, ve2 = 1.0, vc1 = -1.0, vc2 = 2.0;
  constexpr double rb = 1.0, rl = 1.0, alpha_i = 0.1, alpha_n = 0.5;
  Matrix G(2, 2);
  G << (1.0 - alpha_n) * rb, (1.0 - alpha_i) * rb,
      (1.0 - alpha_n) * rb - alpha_n * rl, (1.0 - alpha_n) * rb + rl;
  if (g_matrix) {
    if (g_matrix->rows() != 2 || g_matrix->cols() != 2) {
      throw Error(ErrorKind::DimensionMismatch, "transistor g_matrix must be 2x2");
    }
    G = *g_matrix;
  }

  ParametricProblem pr;
  pr.name = "transistor";
  pr.n = 2;
  pr.horizon = 2.0 * std::numbers::pi;
  pr.g = [G](const Vector& x) { return Vector(G * x); };
  pr.jacobian = [G](const Vector&) { return G; };
  // p = (u1, u1 - u2) with u1 = sin t, u2 = 10 sin t.
  pr.source = [](double t) { return Vector((Vector(2) << std::sin(t), -9.0 * std::sin(t)).finished()); };
  pr.source_rate = [](double t) { return Vector((Vector(2) << std::cos(t), -9.0 * std::cos(t)).finished()); };
  pr.F = ProductMap({ScalarMonotoneMap::practical_diode(ve1, ve2, ordering),
                     ScalarMonotoneMap::practical_diode(vc1, vc2, ordering)});
  pr.lambda = 0.2;
  const Matrix sym = 0.5 * (G + G.transpose());
  pr.c_mono = std::max(0.0, Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().minCoeff());
  pr.kappa_subreg = 4.0;
  pr.box_radius = 3.0;
  // Near-optimal contraction of x - mu G x for this G.
  const double lip = operator_norm_estimate(G);
  pr.oracle_lambda = pr.c_mono > 0.0 ? std::min(0.5, pr.c_mono / (lip * lip)) : 0.05;
  pr.reference_factory = [copy = pr] { return make_splitting_oracle(copy); };
  pr.ell_path = estimate_path_lipschitz(pr);
  return pr;
}

ParametricProblem make_affine(Matrix G, Vector p0, Vector p1, ProductMap F, double horizon, double lambda) {
  const Eigen::Index n = G.rows();
  if (G.cols() != n || p0.size() != n || p1.size() != n || F.dim() != n) {
    throw Error(ErrorKind::DimensionMismatch, "affine problem data must share one dimension");
  }
  ParametricProblem pr;
  pr.name = "affine";
  pr.n = n;
  pr.horizon = horizon;
  pr.g = [G](const Vector& x) { return Vector(G * x); };
  pr.jacobian = [G](const Vector&) { return G; };
  pr.source = [p0, p1](double t) { return Vector(p0 + t * p1); };
  pr.source_rate = [p1](double) { return p1; };
  pr.F = F;
  pr.lambda = lambda;
  const Matrix sym = 0.5 * (G + G.transpose());
  pr.c_mono = std::max(0.0, Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().minCoeff());
  pr.kappa_subreg = pr.c_mono > 0.0 ? 1.0 / pr.c_mono : 1.0;
  pr.box_radius = 1.0;
  const double lip = operator_norm_estimate(G);
  pr.oracle_lambda = pr.c_mono > 0.0 && lip > 0.0 ? std::min(0.9, pr.c_mono / (lip * lip)) : 0.1;

  const bool single_valued = std::all_of(F.components().begin(), F.components().end(),
                                         [](const ScalarMonotoneMap& m) { return m.kind() == MapKind::AffineBranch; });
  if (single_valued) {
    Matrix K = G;
    Vector offset(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      K(i, i) += F[i].slope();
      offset(i) = F[i].offset();
    }
    pr.reference_factory = [K, offset, p0, p1] {
      return Reference([=](double t) { return lu_solve(K, Vector(p0 + t * p1 - offset)); });
    };
    const auto lu = lu_factor(K);
    pr.ell_path = lu ? (lu->inverse() * p1).norm() : 0.0;
  } else {
    pr.reference_factory = [copy = pr] { return make_splitting_oracle(copy); };
    pr.ell_path = estimate_path_lipschitz(pr, 2000);
  }
  return pr;
}

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names = {"practical-diode", "ideal-diode", "transistor"};
  return names;
}

std::optional<ParametricProblem> make_problem(std::string_view name) {
  if (name == "practical-diode") return make_practical_diode();
  if (name == "ideal-diode") return make_ideal_diode();
  if (name == "transistor") return make_transistor();
  return std::nullopt;
}

Reference make_reference(const ParametricProblem& problem) {
  if (!problem.has_reference()) throw Error(ErrorKind::NoReference, problem.name + " has no reference oracle");
  return problem.reference_factory();
}

Vector reference_solution(const ParametricProblem& problem, double t) {
  if (t < 0.0 || t > problem.horizon) {
    throw Error(ErrorKind::InvalidArgument, "reference requested outside [0, T]");
  }
  return make_reference(problem)(t);
}

}  // namespace pathfollow
