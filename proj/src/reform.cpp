#include "pathfollow/reform.hpp"

#include <algorithm>
#include <cmath>

namespace pathfollow {

namespace {

void check_point(const ParametricProblem& problem, const Vector& v, const char* what) {
  if (v.size() != problem.n) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + " has length " + std::to_string(v.size()) + ", problem has n = " +
                    std::to_string(problem.n));
  }
}

}  // namespace

std::string NewtonSystem::selection_id() const {
  return "J" + std::to_string(slope_index) +
         (parametrization == RowParametrization::Default ? "/default" : "/alternate");
}

double residual(const ParametricProblem& problem, double t, const Vector& x, const Vector& d) {
  check_point(problem, x, "x");
  check_point(problem, d, "d");
  const double first = membership_residual(problem.F, d, problem.source(t) - problem.g(x));
  const double second = (x - d).norm();
  return std::max(first, second);
}

ApproxPoint approx_step(const ParametricProblem& problem, double t, const Vector& x, const Vector* hint) {
  check_point(problem, x, "x");
  const double lambda = problem.lambda;
  ApproxPoint ap;
  ap.t = t;
  ap.x_hat = x;
  ap.z = x - lambda * problem.g(x) + lambda * problem.source(t);
  if (hint != nullptr) {
    check_point(problem, *hint, "hint");
    ap.hint = *hint;
  }
  ap.d_hat = resolvent(problem.F, lambda, ap.z, hint);
  const Vector gap = x - ap.d_hat;
  ap.y_hat.resize(2 * problem.n);
  ap.y_hat << gap / lambda, gap;
  return ap;
}

std::vector<Matrix> slope_candidates(const ParametricProblem& problem, const ApproxPoint& ap) {
  return resolvent_slopes(problem.F, problem.lambda, ap.z, ap.hint.size() == 0 ? nullptr : &ap.hint);
}

NewtonSystem build_system(const ParametricProblem& problem, const ApproxPoint& ap, const Matrix& J,
                          RowParametrization parametrization) {
  const Eigen::Index n = problem.n;
  const double lambda = problem.lambda;
  const Matrix I = Matrix::Identity(n, n);
  const Matrix Z = Matrix::Zero(n, n);

  NewtonSystem sys;
  sys.J = J;
  sys.parametrization = parametrization;
  sys.C.resize(2 * n, n);
  sys.R.resize(2 * n, n);
  if (parametrization == RowParametrization::Default) {
    sys.C << lambda * I, Z;
    sys.R << Z, I;
  } else {
    sys.C << lambda * I, I;
    sys.R << I, Z;
  }

  const Matrix grad = problem.jacobian(ap.x_hat);
  // Row form of the generator identities, all rows at once.
  const Matrix y1 = sys.C * J;  // rows m^T J
  const Matrix& y2 = sys.R;
  sys.N.resize(2 * n, 2 * n);
  sys.N << y1, y2;
  sys.M.resize(2 * n, 2 * n);
  sys.M << y1 * grad + y2, sys.C * (I - J) / lambda - y2;
  return sys;
}

NewtonSystem assemble_newton(const ParametricProblem& problem, const ApproxPoint& ap, std::span<const Matrix> slopes) {
  for (auto param : {RowParametrization::Default, RowParametrization::Alternate}) {
    for (std::size_t k = 0; k < slopes.size(); ++k) {
      NewtonSystem sys = build_system(problem, ap, slopes[k], param);
      sys.slope_index = k;
      if (lu_factor(sys.M)) return sys;
    }
  }
  throw Error(ErrorKind::AllSingular, "no slope selection gives a nonsingular M at t = " + std::to_string(ap.t));
}

NewtonSystem assemble_newton(const ParametricProblem& problem, const ApproxPoint& ap, const Matrix& J) {
  return assemble_newton(problem, ap, std::span<const Matrix>(&J, 1));
}

NewtonSystem assemble_newton(const ParametricProblem& problem, const ApproxPoint& ap) {
  const auto slopes = slope_candidates(problem, ap);
  return assemble_newton(problem, ap, std::span<const Matrix>(slopes));
}

double structure_defect(const ParametricProblem& problem, const ApproxPoint& ap, const NewtonSystem& sys) {
  const Eigen::Index n = problem.n;
  const double lambda = problem.lambda;
  const Matrix grad = problem.jacobian(ap.x_hat);
  const Matrix I = Matrix::Identity(n, n);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    const Vector m = sys.C.row(i).transpose();
    const Vector ys1 = sys.N.row(i).head(n).transpose();
    const Vector ys2 = sys.N.row(i).tail(n).transpose();
    const Vector xs1 = sys.M.row(i).head(n).transpose();
    const Vector xs2 = sys.M.row(i).tail(n).transpose();
    worst = std::max(worst, (ys1 - sys.J.transpose() * m).cwiseAbs().maxCoeff());
    worst = std::max(worst, (ys2 - sys.R.row(i).transpose()).cwiseAbs().maxCoeff());
    worst = std::max(worst, (xs1 - (grad.transpose() * ys1 + ys2)).cwiseAbs().maxCoeff());
    worst = std::max(worst, (xs2 - ((I - sys.J.transpose()) * m / lambda - ys2)).cwiseAbs().maxCoeff());
  }
  return worst;
}

double regularity_product(const NewtonSystem& sys) {
  const auto lu = lu_factor(sys.M);
  if (!lu) throw Error(ErrorKind::Singular, "regularity product of a singular system");
  Matrix stacked(sys.M.rows(), sys.M.cols() + sys.N.cols());
  stacked << sys.M, sys.N;
  return operator_norm_estimate(lu->inverse()) * frobenius_norm(stacked);
}

std::pair<Vector, Vector> newton_step(const ParametricProblem& problem, const ApproxPoint& ap,
                                      const NewtonSystem& sys, double dt) {
  const Eigen::Index n = problem.n;
  Vector rhs = sys.N * ap.y_hat;
  if (dt != 0.0) {
    Vector rate = Vector::Zero(2 * n);
    rate.head(n) = problem.source_rate(ap.t);
    const Vector drift = -(sys.N * rate);
    rhs -= drift * dt;
  }
  const Vector step = lu_solve(sys.M, rhs);
  return {ap.x_hat - step.head(n), ap.d_hat - step.tail(n)};
}

}  // namespace pathfollow
