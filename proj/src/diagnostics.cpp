#include "pathfollow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>

namespace pathfollow {

namespace {

std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// Uniform point in the Euclidean ball of radius r.
Vector ball_sample(std::mt19937_64& rng, Eigen::Index dim, double r) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector v(dim);
  double len = 0.0;
  do {
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal(rng);
    len = v.norm();
  } while (!(len > 0.0));
  const double radius = r * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
  return v * (radius / len);
}

Vector reference_point(const ParametricProblem& problem, double t) {
  if (!problem.has_reference()) throw Error(ErrorKind::NoReference, problem.name + " has no reference oracle");
  return reference_solution(problem, t);
}

RateRow run_row(const ParametricProblem& problem, int n_steps, RunConfig config, StartRule rule) {
  RateRow row;
  row.N = n_steps;
  row.h = problem.horizon / n_steps;
  config.algorithm = Algorithm::Uniform;
  config.steps = n_steps;
  try {
    std::optional<Vector> x0;
    if (rule == StartRule::PathOffset) {
      const Vector dir = Vector::Ones(problem.n) / std::sqrt(static_cast<double>(problem.n));
      x0 = reference_solution(problem, 0.0) + problem.ell_path * row.h * dir;
    }
    const Trajectory traj = uniform_path_follow(problem, config, std::move(x0));
    if (traj.failure) {
      row.failed = true;
      row.message = traj.failure->message;
    } else {
      row.max_err = traj.summary.max_err;
    }
  } catch (const Error& e) {
    row.failed = true;
    row.message = e.what();
  }
  return row;
}

}  // namespace

GridError grid_error(const Trajectory& traj, const Reference& reference) {
  if (!reference) throw Error(ErrorKind::NoReference, "grid_error needs a reference");
  GridError out;
  out.per_step.reserve(traj.records.size());
  for (const auto& rec : traj.records) {
    const double e = (rec.x - reference(rec.t)).norm();
    out.per_step.push_back(e);
    out.max_err = std::max(out.max_err, e);
  }
  return out;
}

double observed_order(double e_prev, double h_prev, double e_cur, double h_cur) {
  return std::log(e_prev / e_cur) / std::log(h_prev / h_cur);
}

bool RateTable::all_failed() const {
  return std::all_of(rows.begin(), rows.end(), [](const RateRow& r) { return r.failed; });
}

void fill_orders(RateTable& table) {
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    auto& row = table.rows[i];
    row.observed_order.reset();
    if (i == 0) continue;
    const auto& prev = table.rows[i - 1];
    if (prev.max_err && row.max_err && *prev.max_err > 0.0 && *row.max_err > 0.0) {
      row.observed_order = observed_order(*prev.max_err, prev.h, *row.max_err, row.h);
    }
  }
}

RateTable rate_study(const ParametricProblem& problem, std::span<const int> Ns, const RunConfig& config,
                     StartRule rule, bool parallel) {
  if (Ns.size() < 2) throw Error(ErrorKind::InvalidArgument, "a rate study needs at least two grid counts");
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    if (Ns[i] < 1 || (i > 0 && Ns[i] <= Ns[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "grid counts must be positive and strictly increasing");
    }
  }
  if (!problem.has_reference()) throw Error(ErrorKind::NoReference, problem.name + " has no reference oracle");

  RateTable table;
  table.rows.resize(Ns.size());
  if (parallel) {
    std::vector<std::future<RateRow>> jobs;
    jobs.reserve(Ns.size());
    for (int n_steps : Ns) {
      jobs.push_back(std::async(std::launch::async, run_row, std::cref(problem), n_steps, config, rule));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) table.rows[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < Ns.size(); ++i) table.rows[i] = run_row(problem, Ns[i], config, rule);
  }
  fill_orders(table);
  return table;
}

ProbeReport estimate_kappa(const ParametricProblem& problem, double t, double delta, int samples,
                           std::uint64_t seed) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "probe radius must be positive");
  const Vector x_bar = reference_point(problem, t);
  ProbeReport rep;
  rep.t = t;
  rep.delta = delta;
  rep.samples = samples;
  for (int i = 0; i < samples; ++i) {
    auto rng = sample_engine(seed, 0, static_cast<std::uint64_t>(i));
    const Vector v = ball_sample(rng, problem.n, delta);
    const Vector x = x_bar + v;
    Vector d = x;
    if (i % 2 == 1) d = approx_step(problem, t, x, &x_bar).d_hat;
    const double r = residual(problem, t, x, d);
    if (!(r > 1e-14) || !std::isfinite(r)) continue;
    const double dist = std::max(v.norm(), (d - x_bar).norm());
    const double ratio = dist / r;
    if (ratio > rep.kappa_hat || rep.worst_witness.size() == 0) {
      rep.kappa_hat = std::max(rep.kappa_hat, ratio);
      rep.worst_witness.resize(2 * problem.n);
      rep.worst_witness << x, d;
    }
  }
  return rep;
}

std::vector<ProbeReport> semismooth_probe(const ParametricProblem& problem, double t, std::span<const double> deltas,
                                          int samples, std::uint64_t seed) {
  const Vector x_bar = reference_point(problem, t);
  const Eigen::Index n = problem.n;
  std::vector<ProbeReport> out;
  out.reserve(deltas.size());
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    const double delta = deltas[j];
    if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "probe radius must be positive");
    ProbeReport rep;
    rep.t = t;
    rep.delta = delta;
    rep.samples = samples;
    for (int i = 0; i < samples; ++i) {
      auto rng = sample_engine(seed, j + 1, static_cast<std::uint64_t>(i));
      Vector v = ball_sample(rng, n, delta);
      ApproxPoint ap;
      Vector disp(4 * n);
      double dist = 0.0;
      for (int shrink = 0; shrink < 60; ++shrink) {
        ap = approx_step(problem, t, x_bar + v, &x_bar);
        disp << ap.x_hat - x_bar, ap.d_hat - x_bar, ap.y_hat;
        dist = disp.norm();
        if (dist <= delta) break;
        v *= 0.99 * delta / dist;
      }
      if (!(dist <= delta) || !(dist > 0.0)) continue;

      NewtonSystem sys;
      try {
        sys = assemble_newton(problem, ap);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::AllSingular) throw;
        sys = build_system(problem, ap, slope_candidates(problem, ap).front(), RowParametrization::Default);
      }
      for (Eigen::Index r = 0; r < 2 * n; ++r) {
        const double scale = std::sqrt(sys.M.row(r).squaredNorm() + sys.N.row(r).squaredNorm());
        if (!(scale > 0.0)) continue;
        const double gap = std::abs(sys.M.row(r).dot(disp.head(2 * n)) - sys.N.row(r).dot(disp.tail(2 * n)));
        const double ratio = gap / (scale * dist);
        if (ratio > rep.eps_hat || rep.worst_witness.size() == 0) {
          rep.eps_hat = std::max(rep.eps_hat, ratio);
          rep.worst_witness.resize(4 * n);
          rep.worst_witness << ap.x_hat, ap.d_hat, ap.y_hat;
        }
      }
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace pathfollow
