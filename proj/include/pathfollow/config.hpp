#pragma once

// Flat `key = value` configuration with `#` comments. Top-level keys set run
// parameters; a `[problem.<name>]` section overrides data of one problem.
//
//   algorithm = adaptive
//   h_max = 0.05
//
//   [problem.transistor]
//   g_matrix = 0.5, 0.9; 0, 1.5
//   diode_ordering = monotone

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "pathfollow/solvers.hpp"

namespace pathfollow {

struct RunOverrides {
  std::optional<std::string> problem;
  std::optional<Algorithm> algorithm;
  std::optional<int> steps;
  std::optional<double> h_max;
  std::optional<double> backoff;
  std::optional<int> max_backoffs;
  std::optional<double> refine_tol;
  std::optional<int> refine_max;
  std::optional<double> kappa;
  std::optional<double> ell;
  std::optional<double> tol_zero;
  std::optional<bool> drift;
  std::optional<double> ell_hat_factor;

  /// Fields set in `over` replace the ones here.
  void merge(const RunOverrides& over);
  [[nodiscard]] RunConfig apply(RunConfig base) const;
};

struct ProblemOverrides {
  std::optional<double> lambda;
  std::optional<double> horizon;
  std::optional<double> kappa_subreg;
  std::optional<double> ell_path;
  std::optional<double> c_mono;
  std::optional<Matrix> g_matrix;
  std::optional<BranchOrdering> diode_ordering;

  void merge(const ProblemOverrides& over);
};

struct ConfigFile {
  RunOverrides run;
  std::map<std::string, ProblemOverrides, std::less<>> problems;

  [[nodiscard]] ProblemOverrides problem(std::string_view name) const;
};

/// Throws InvalidArgument naming `source` and the line on any unknown key,
/// unknown section or malformed value.
[[nodiscard]] ConfigFile parse_config(std::string_view text, std::string_view source = "<config>");
[[nodiscard]] ConfigFile load_config(const std::filesystem::path& path);

/// Builds a shipped problem and applies overrides. g_matrix and
/// diode_ordering only apply to the transistor.
[[nodiscard]] ParametricProblem resolve_problem(std::string_view name, const ProblemOverrides& over);

[[nodiscard]] std::optional<Algorithm> parse_algorithm(std::string_view text);
[[nodiscard]] std::string_view to_string(Algorithm algorithm);
[[nodiscard]] std::optional<BranchOrdering> parse_ordering(std::string_view text);

/// Parses "a, b; c, d" (rows split by semicolons) into a matrix.
[[nodiscard]] std::optional<Matrix> parse_matrix(std::string_view text);

}  // namespace pathfollow
