#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathfollow/solvers.hpp"

namespace pathfollow {

struct GridError {
  double max_err = 0.0;
  std::vector<double> per_step;
};

/// ||x_k - reference(t_k)|| for every record.
[[nodiscard]] GridError grid_error(const Trajectory& traj, const Reference& reference);

/// log(e_prev / e_cur) / log(h_prev / h_cur).
[[nodiscard]] double observed_order(double e_prev, double h_prev, double e_cur, double h_cur);

struct RateRow {
  int N = 0;
  double h = 0.0;
  std::optional<double> max_err;
  std::optional<double> observed_order;
  bool failed = false;
  std::string message;
};

struct RateTable {
  std::vector<RateRow> rows;

  [[nodiscard]] bool all_failed() const;
};

/// Fills observed_order from consecutive successful rows.
void fill_orders(RateTable& table);

/// How rate_study picks the starting point of each run.
enum class StartRule {
  Exact,     ///< x0 = x(0)
  PathOffset ///< x0 = x(0) + ell_path * h along (1, ..., 1) / sqrt(n)
};

/// Uniform runs for every N (strictly increasing, at least two). Driver
/// failures are recorded on the row. With `parallel` the runs fan out on
/// separate threads; rows come back in N order either way.
[[nodiscard]] RateTable rate_study(const ParametricProblem& problem, std::span<const int> Ns,
                                   const RunConfig& config = {}, StartRule rule = StartRule::Exact,
                                   bool parallel = true);

struct ProbeReport {
  double t = 0.0;
  double delta = 0.0;
  int samples = 0;
  double kappa_hat = 0.0;
  double eps_hat = 0.0;
  Vector worst_witness;  ///< empty when no sample counted
};

/// Empirical subregularity modulus of the doubled system at (x(t), x(t)).
///
/// Even samples perturb both blocks together, u = (x(t) + v, x(t) + v); odd
/// samples put the second block on the graph, u = (x(t) + v, d_hat) with
/// d_hat from approx_step. Distances use max(|x|, |d|) on the pair. Each
/// sample draws from its own generator seeded by (seed, index), so a larger
/// sample count extends the same sequence.
[[nodiscard]] ProbeReport estimate_kappa(const ParametricProblem& problem, double t, double delta, int samples,
                                         std::uint64_t seed);

/// Empirical semismoothness modulus for each radius. Graph points (w, y)
/// come from approx_step at perturbed x; the rows of an assembled (M, N) at
/// each point are tested against the displacement from ((x(t), x(t)), 0).
[[nodiscard]] std::vector<ProbeReport> semismooth_probe(const ParametricProblem& problem, double t,
                                                        std::span<const double> deltas, int samples,
                                                        std::uint64_t seed);

}  // namespace pathfollow
