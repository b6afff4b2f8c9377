#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pathfollow/solvers.hpp"
#include "support.hpp"

using namespace pathfollow;
using pathfollow::testing::random_vector;
using pathfollow::testing::vec;

namespace {

const ParametricProblem kIdeal = make_ideal_diode();

double ideal_path(double t) { return std::sinh(std::max(std::sin(2.0 * std::numbers::pi * t), 0.0)); }

double pair_error(const StepRecord& r, const Vector& xt) {
  Vector w(2 * xt.size()), wt(2 * xt.size());
  w << r.x, r.d;
  wt << xt, xt;
  return (w - wt).norm();
}

RunConfig uniform(int steps) {
  RunConfig cfg;
  cfg.algorithm = Algorithm::Uniform;
  cfg.steps = steps;
  return cfg;
}

RunConfig adaptive(double h_max, double kappa, double ell) {
  RunConfig cfg;
  cfg.algorithm = Algorithm::Adaptive;
  cfg.h_max = h_max;
  cfg.backoff = 0.5;
  cfg.kappa = kappa;
  cfg.ell = ell;
  return cfg;
}

}  // namespace

static_assert(accept_step(2.0, 1.0, 0.01, 0.02, 0.01));
static_assert(!accept_step(2.0, 1.0, 0.0, 0.01, 0.1));
static_assert(ck_update(0.0, 1.0, 0.1) == 0.5 * 0.1 + 0.1);

TEST_CASE("accept_step and ck_update examples") {
  CHECK(accept_step(2.0, 1.0, 0.01, 0.02, 0.01));
  CHECK_FALSE(accept_step(2.0, 1.0, 0.0, 0.01, 0.1));
  for (double h : {1e-8, 0.1, 3.0}) CHECK(accept_step(5.0, 0.0, 0.0, h, 0.0));
  CHECK(ck_update(0.0, 1.0, 0.1) == doctest::Approx(0.15));
  CHECK(ck_update(0.3, 1.0, 0.1) == doctest::Approx(0.25));
  CHECK(ck_update(0.4, 1.0, 0.0) == doctest::Approx(0.2));
}

TEST_CASE("forward-backward examples") {
  const double s1 = std::sinh(1.0);
  const auto [x, d] = forward_backward(kIdeal, 0.25, vec({s1}), vec({s1}));
  CHECK(x(0) == doctest::Approx(s1).epsilon(1e-15));
  CHECK(d(0) == doctest::Approx(s1).epsilon(1e-15));

  const auto [x2, d2] = forward_backward(kIdeal, 0.75, vec({0.1}), vec({0.1}));
  CHECK(x2(0) == 0.0);
  CHECK(d2(0) == doctest::Approx(0.1));
}

TEST_CASE("fixed points of the forward-backward map have zero residual") {
  for (const auto& name : problem_names()) {
    const auto pr = *make_problem(name);
    const double t = 0.37 * pr.horizon;
    auto r = refine(pr, t, Vector::Zero(pr.n), Vector::Zero(pr.n), 1e-13, 100000);
    const auto [x, d] = forward_backward(pr, t, r.x, r.d);
    CHECK((x - r.x).norm() <= 1e-11);
    CHECK(residual(pr, t, r.x, r.d) <= 1e-13);
  }
}

TEST_CASE("refine examples") {
  const double s1 = std::sinh(1.0);
  CHECK(refine(kIdeal, 0.25, vec({s1}), vec({s1}), 1e-10, 10).iterations == 0);

  const auto r = refine(kIdeal, 0.25, vec({0.0}), vec({0.0}), 1e-10, 100000);
  CHECK(r.iterations > 0);
  CHECK(r.iterations <= 200);
  CHECK(std::abs(r.x(0) - s1) <= 1e-9);

  auto wide = make_transistor();
  wide.lambda = 2.0;
  try {
    (void)refine(wide, std::numbers::pi / 2, Vector::Zero(2), Vector::Zero(2), 1e-10, 100000);
    FAIL("expected RefineDiverged");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RefineDiverged);
  }
  CHECK_THROWS_AS((void)refine(kIdeal, 0.25, vec({0.0}), vec({0.0}), 0.0, 10), Error);
}

TEST_CASE("forward-backward map contracts on the working box") {
  std::mt19937_64 rng(77);
  for (const auto& name : problem_names()) {
    const auto pr = *make_problem(name);
    std::uniform_real_distribution<double> ut(0.0, pr.horizon);
    double q = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = ut(rng);
      const Vector x1 = random_vector(rng, pr.n, -pr.box_radius, pr.box_radius);
      const Vector d1 = random_vector(rng, pr.n, -pr.box_radius, pr.box_radius);
      const Vector x2 = random_vector(rng, pr.n, -pr.box_radius, pr.box_radius);
      const Vector d2 = random_vector(rng, pr.n, -pr.box_radius, pr.box_radius);
      const auto [a, b] = forward_backward(pr, t, x1, d1);
      const auto [c, d] = forward_backward(pr, t, x2, d2);
      const double num = std::sqrt((a - c).squaredNorm() + (b - d).squaredNorm());
      const double den = std::sqrt((x1 - x2).squaredNorm() + (d1 - d2).squaredNorm());
      q = std::max(q, num / den);
    }
    INFO(name << " q=" << q);
    CHECK(q < 1.0);
  }
}

TEST_CASE("forward-backward map contracts for the monotone transistor ordering") {
  std::mt19937_64 rng(78);
  const auto pr = make_transistor(std::nullopt, BranchOrdering::Monotone);
  std::uniform_real_distribution<double> ut(0.0, pr.horizon);
  double q = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double t = ut(rng);
    const Vector x1 = random_vector(rng, pr.n, -pr.box_radius, pr.box_radius);
    const Vector d1 = random_vector(rng, pr.n, -pr.box_radius, pr.box_radius);
    const Vector x2 = random_vector(rng, pr.n, -pr.box_radius, pr.box_radius);
    const Vector d2 = random_vector(rng, pr.n, -pr.box_radius, pr.box_radius);
    const auto [a, b] = forward_backward(pr, t, x1, d1);
    const auto [c, d] = forward_backward(pr, t, x2, d2);
    q = std::max(q, std::sqrt((a - c).squaredNorm() + (b - d).squaredNorm()) /
                        std::sqrt((x1 - x2).squaredNorm() + (d1 - d2).squaredNorm()));
  }
  INFO("q=" << q);
  CHECK(q < 1.0);
}

TEST_CASE("uniform driver on the ideal diode meets the grid bound") {
  const Trajectory traj = uniform_path_follow(kIdeal, uniform(640));
  REQUIRE(traj.ok());
  REQUIRE(traj.records.size() == 641);
  CHECK(traj.records.front().t == 0.0);
  CHECK(traj.records.back().t == 3.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    const auto& r = traj.records[k];
    CHECK(r.k == static_cast<int>(k));
    worst = std::max(worst, std::abs(r.x(0) - ideal_path(r.t)));
    if (k > 0) {
      CHECK(r.t > traj.records[k - 1].t);
      CHECK(*r.h == doctest::Approx(r.t - traj.records[k - 1].t).epsilon(1e-15));
    }
  }
  CHECK(worst <= kIdeal.ell_path * 3.0 / 640.0);
  CHECK(*traj.summary.max_err == doctest::Approx(worst).epsilon(1e-12));
}

TEST_CASE("uniform driver error is first order on the ideal diode") {
  std::vector<double> errs;
  const double ell = 2.0 * std::numbers::pi * std::cosh(1.0);
  bool bound_reached = false;
  for (int n = 80; n <= 5120; n *= 2) {
    const Trajectory traj = uniform_path_follow(kIdeal, uniform(n));
    REQUIRE(traj.ok());
    double e = 0.0;
    for (const auto& r : traj.records) e = std::max(e, std::abs(r.x(0) - ideal_path(r.t)));
    errs.push_back(e);
    const bool holds = e <= ell * 3.0 / n;
    if (bound_reached) CHECK(holds);
    bound_reached = bound_reached || holds;
  }
  CHECK(bound_reached);
  for (std::size_t i = errs.size() - 3; i < errs.size(); ++i) {
    const double ratio = errs[i - 1] / errs[i];
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }
}

TEST_CASE("uniform driver is exact on affine instances") {
  const auto pr = pathfollow::testing::affine_pair();
  const Reference ref = make_reference(pr);
  for (int n : {1, 7, 50}) {
    const Trajectory traj = uniform_path_follow(pr, uniform(n));
    REQUIRE(traj.ok());
    for (const auto& r : traj.records) CHECK((r.x - ref(r.t)).norm() <= 1e-12);
  }
}

TEST_CASE("early exits copy the iterate and record the measured residual") {
  // A constant source keeps the exact start exact.
  const auto pr = pathfollow::testing::doubling_problem();
  const Trajectory traj = uniform_path_follow(pr, uniform(10), vec({0.0}));
  REQUIRE(traj.ok());
  for (std::size_t k = 1; k < traj.records.size(); ++k) {
    const auto& r = traj.records[k];
    CHECK(r.slope_branch == "copy");
    CHECK(r.residual == residual(pr, r.t, r.x, r.d));
    CHECK(r.x == traj.records[k - 1].x);
  }
  // Copies on a moving source record the same measured residual.
  const Trajectory ideal = uniform_path_follow(kIdeal, uniform(640));
  int copies = 0;
  for (const auto& r : ideal.records) {
    if (r.slope_branch != "copy") continue;
    ++copies;
    CHECK(r.residual == residual(kIdeal, r.t, r.x, r.d));
    CHECK(r.residual <= 1e-12);
  }
  CHECK(copies > 0);
}

TEST_CASE("uniform driver argument checks") {
  CHECK_THROWS_AS((void)uniform_path_follow(kIdeal, uniform(0)), Error);
  CHECK_THROWS_AS((void)uniform_path_follow(kIdeal, uniform(10), Vector::Zero(2)), Error);
  auto bare = kIdeal;
  bare.reference_factory = nullptr;
  try {
    (void)uniform_path_follow(bare, uniform(10));
    FAIL("expected NoReference");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoReference);
  }
  const Trajectory traj = uniform_path_follow(bare, uniform(10), vec({0.0}));
  CHECK(traj.ok());
  CHECK_FALSE(traj.summary.max_err.has_value());
}

TEST_CASE("uniform driver stops with a partial trajectory on AllSingular") {
  // Constant g with an ideal diode and a positive source: z > 0 gives J = 1
  // and a vanishing gradient, so no selection is invertible.
  const auto pr = pathfollow::testing::gradient_free_diode();
  const Trajectory traj = uniform_path_follow(pr, uniform(5), vec({0.5}));
  REQUIRE(traj.failure.has_value());
  CHECK(traj.failure->kind == ErrorKind::AllSingular);
  CHECK(traj.records.size() == 1);
}

TEST_CASE("single step examples") {
  const auto pr = pathfollow::testing::affine_pair_zero_map();
  const Reference ref = make_reference(pr);
  const Vector xt = ref(0.3);
  const auto [x, d] = single_step(pr, 0.3, 0.35, xt, xt, true);
  CHECK((x - xt).norm() <= 1e-12);
  CHECK((d - xt).norm() <= 1e-12);

  // Drift off on a smooth stretch: a first-order predictor toward x(s).
  const double t = 0.1;
  for (double h : {1e-2, 1e-3}) {
    const Vector x0 = vec({ideal_path(t)});
    const auto [u, v] = single_step(kIdeal, t, t + h, x0, x0, false);
    const double theta = 2.0 * std::numbers::pi * t;
    const double rate = std::cosh(std::sin(theta)) * std::cos(theta) * 2.0 * std::numbers::pi;
    CHECK(std::abs(u(0) - (x0(0) + rate * h)) <= 60.0 * h * h);
  }
  CHECK_THROWS_AS((void)single_step(kIdeal, 0.2, 0.2, vec({0.0}), vec({0.0})), Error);
}

TEST_CASE("single step error contract with drift off") {
  std::mt19937_64 rng(5);
  for (const auto& name : problem_names()) {
    const auto pr = *make_problem(name);
    const Reference ref = make_reference(pr);
    std::uniform_real_distribution<double> ut(0.0, pr.horizon - 2e-3);
    std::vector<double> ts(40);
    for (auto& t : ts) t = ut(rng);
    std::sort(ts.begin(), ts.end());
    for (double t : ts) {
      const double s = t + 1e-3;
      const Vector xt = ref(t);
      const Vector xs = ref(s);
      Vector v = random_vector(rng, pr.n);
      v *= 1e-3 / v.norm();
      const Vector start = xt + v;
      const auto [u, d] = single_step(pr, t, s, start, start, false);
      const double bound = 0.5 * std::max(v.norm(), s - t) + pr.ell_path * (s - t);
      INFO(name << " t=" << t);
      CHECK((u - xs).norm() < 1.05 * bound);
    }
  }
}

TEST_CASE("adaptive driver on the ideal diode keeps a sound ledger") {
  const RunConfig cfg = adaptive(0.05, 3.0, 10.0);
  const Trajectory traj = adaptive_path_follow(kIdeal, cfg);
  REQUIRE(traj.ok());
  CHECK(traj.records.back().t == 3.0);
  double c = 0.0;
  for (std::size_t k = 0; k < traj.records.size(); ++k) {
    const auto& r = traj.records[k];
    REQUIRE(r.c_k.has_value());
    if (k > 0) {
      const double h = *r.h;
      CHECK(h > 0.0);
      CHECK(h <= 0.05 + 1e-15);
      CHECK(accept_step(3.0, 10.0, c, h, r.residual));
      if (r.refinements == 0) CHECK(*r.c_k == ck_update(c, std::numbers::sqrt2 * 10.0, h));
      CHECK(r.residual == residual(kIdeal, r.t, r.x, r.d));
    }
    CHECK(pair_error(r, vec({ideal_path(r.t)})) <= *r.c_k + 1e-14);
    c = *r.c_k;
  }
}

TEST_CASE("adaptive driver refines first from a distant start") {
  RunConfig cfg = adaptive(0.05, 3.0, 10.0);
  const Trajectory traj = adaptive_path_follow(kIdeal, cfg, vec({1.0}));
  REQUIRE(traj.ok());
  CHECK(traj.records.front().refinements > 0);
  CHECK(traj.records.front().residual <= cfg.refine_tol / 3.0);
  CHECK(traj.summary.total_refinements >= traj.records.front().refinements);
  for (const auto& r : traj.records) CHECK(pair_error(r, vec({ideal_path(r.t)})) <= *r.c_k + 1e-12);
}

TEST_CASE("adaptive driver takes full steps on affine instances") {
  const auto pr = pathfollow::testing::affine_pair();
  const Trajectory traj = adaptive_path_follow(pr, adaptive(0.1, 1.0, 1.0));
  REQUIRE(traj.ok());
  CHECK(traj.records.back().t == 1.0);
  for (std::size_t k = 1; k < traj.records.size(); ++k) {
    CHECK(*traj.records[k].h == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(traj.records[k].residual <= 1e-12);
  }
}

TEST_CASE("adaptive driver argument checks") {
  CHECK_THROWS_AS((void)adaptive_path_follow(kIdeal, adaptive(0.0, 3.0, 10.0)), Error);
  CHECK_THROWS_AS((void)adaptive_path_follow(kIdeal, adaptive(4.0, 3.0, 10.0)), Error);
  RunConfig bad = adaptive(0.05, 3.0, 10.0);
  bad.backoff = 1.0;
  CHECK_THROWS_AS((void)adaptive_path_follow(kIdeal, bad), Error);
  bad.backoff = 0.5;
  bad.max_backoffs = -1;
  CHECK_THROWS_AS((void)adaptive_path_follow(kIdeal, bad), Error);
}

TEST_CASE("adaptive driver reports a stall when no step passes after refinement") {
  // With the drift term the candidate tracks x(t), so the test
  // kappa |x(s) - x(t)| <= (1/2 + ell) h cannot hold near t = 0.
  RunConfig cfg = adaptive(0.05, 3.0, 10.0);
  cfg.drift = true;
  const Trajectory traj = adaptive_path_follow(kIdeal, cfg);
  REQUIRE(traj.failure.has_value());
  CHECK(traj.failure->kind == ErrorKind::Stalled);
  CHECK(traj.records.size() == 1);
}

TEST_CASE("adaptive driver propagates refinement divergence") {
  auto wide = make_transistor();
  wide.lambda = 2.0;
  RunConfig cfg = adaptive(0.5, 4.0, 1.0);
  const Trajectory traj = adaptive_path_follow(wide, cfg, vec({2.0, -2.0}));
  REQUIRE(traj.failure.has_value());
  CHECK(traj.failure->kind == ErrorKind::RefineDiverged);
}

TEST_CASE("drivers are deterministic") {
  const Trajectory a = path_follow(kIdeal, adaptive(0.05, 3.0, 10.0));
  const Trajectory b = path_follow(kIdeal, adaptive(0.05, 3.0, 10.0));
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].t == b.records[k].t);
    CHECK(a.records[k].x == b.records[k].x);
    CHECK(a.records[k].d == b.records[k].d);
  }
}
