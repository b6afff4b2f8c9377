#include "pathfollow/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>

#include "pathfollow/config.hpp"
#include "pathfollow/csv.hpp"
#include "pathfollow/diagnostics.hpp"

namespace pathfollow {

namespace {

// Options that every problem-facing subcommand shares.
struct CommonFlags {
  std::string problem;
  std::string config;
  std::string out = "-";
  double lambda = 0.0;
  CLI::Option* problem_opt = nullptr;
  CLI::Option* config_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;

  void attach(CLI::App* cmd) {
    problem_opt = cmd->add_option("--problem", problem, "Problem name (see `list`)");
    config_opt = cmd->add_option("--config", config, "Config file; defaults to $PATHFOLLOW_CONFIG");
    lambda_opt = cmd->add_option("--lambda", lambda, "Resolvent parameter override");
    cmd->add_option("--out", out, "Output CSV path, '-' for standard output");
  }
};

struct Resolved {
  ConfigFile file;
  std::string config_path;
  std::string name;
  ParametricProblem problem;
};

[[noreturn]] void usage(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

Resolved resolve(const CommonFlags& flags, const RunOverrides& run_flags) {
  Resolved r;
  if (flags.config_opt->count() > 0) {
    r.config_path = flags.config;
  } else if (const char* env = std::getenv("PATHFOLLOW_CONFIG"); env != nullptr && *env != '\0') {
    r.config_path = env;
  }
  if (!r.config_path.empty()) r.file = load_config(r.config_path);
  r.file.run.merge(run_flags);

  if (flags.problem_opt->count() > 0) {
    r.name = flags.problem;
  } else if (r.file.run.problem) {
    r.name = *r.file.run.problem;
  } else {
    usage("no problem given; pass --problem or set `problem` in the config");
  }
  ProblemOverrides po = r.file.problem(r.name);
  if (flags.lambda_opt->count() > 0) po.lambda = flags.lambda;
  r.problem = resolve_problem(r.name, po);
  return r;
}

void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (path == "-") {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) usage("cannot open output " + path);
  write(file);
  if (!file) throw Error(ErrorKind::InvalidArgument, "failed writing " + path);
}

HeaderEcho problem_echo(const Resolved& r) {
  HeaderEcho h{{"problem", r.name},
               {"n", std::to_string(r.problem.n)},
               {"T", format_real(r.problem.horizon)},
               {"lambda", format_real(r.problem.lambda)}};
  if (!r.config_path.empty()) h.emplace_back("config", r.config_path);
  return h;
}

std::vector<int> parse_steps(const std::string& text) {
  std::vector<int> out;
  auto to_int = [&](const std::string& s) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      usage("bad --steps entry '" + s + "'");
    }
    if (used != s.size()) usage("bad --steps entry '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
      const auto colon = text.find(':', pos);
      parts.push_back(text.substr(pos, colon - pos));
      if (colon == std::string::npos) break;
      pos = colon + 1;
    }
    if (parts.size() != 3) usage("--steps range must be start:factor:count");
    const int start = to_int(parts[0]);
    const int factor = to_int(parts[1]);
    const int count = to_int(parts[2]);
    if (start < 1 || factor < 2 || count < 0) usage("--steps range needs start >= 1, factor >= 2");
    long long v = start;
    for (int i = 0; i < count; ++i, v *= factor) {
      if (v > 1'000'000'000LL) usage("--steps range overflows");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    out.push_back(to_int(text.substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> parse_reals(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      usage("bad number '" + item + "'");
    }
    if (used != item.size()) usage("bad number '" + item + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string summary_value(const std::optional<double>& v) { return v ? format_real(*v) : "n/a"; }

int cmd_run(const CommonFlags& flags, const RunOverrides& run_flags, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve(flags, run_flags);
  RunConfig cfg = r.file.run.apply(RunConfig{});
  if (cfg.algorithm == Algorithm::Uniform && cfg.steps < 1) usage("uniform runs need --steps >= 1");
  if (cfg.algorithm == Algorithm::Adaptive && !(cfg.h_max > 0.0)) usage("adaptive runs need --hmax > 0");
  if (cfg.kappa <= 0.0) cfg.kappa = r.problem.kappa_subreg;
  if (cfg.ell <= 0.0) cfg.ell = r.problem.ell_path;

  HeaderEcho header = problem_echo(r);
  header.emplace_back("algorithm", std::string(to_string(cfg.algorithm)));
  if (cfg.algorithm == Algorithm::Uniform) {
    header.emplace_back("steps", std::to_string(cfg.steps));
  } else {
    header.emplace_back("h_max", format_real(cfg.h_max));
    header.emplace_back("a", format_real(cfg.backoff));
    header.emplace_back("i_max", std::to_string(cfg.max_backoffs));
    header.emplace_back("kappa", format_real(cfg.kappa));
    header.emplace_back("ell", format_real(cfg.ell));
    header.emplace_back("ell_hat_factor", format_real(cfg.ell_hat_factor));
    header.emplace_back("refine_tol", format_real(cfg.refine_tol));
    header.emplace_back("refine_max", std::to_string(cfg.refine_max));
    header.emplace_back("drift", cfg.drift ? "true" : "false");
  }
  header.emplace_back("tol_zero", format_real(cfg.tol_zero));

  const Trajectory traj = path_follow(r.problem, cfg);
  emit(flags.out, out, [&](std::ostream& os) { write_trajectory_csv(os, traj, r.problem.n, header); });
  out << "problem=" << r.name << " algo=" << to_string(cfg.algorithm)
      << " steps=" << (traj.records.empty() ? 0 : traj.records.size() - 1)
      << " max_residual=" << format_real(traj.summary.max_residual)
      << " max_err=" << summary_value(traj.summary.max_err) << '\n';
  if (traj.failure) {
    err << "error: " << traj.failure->message << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_study(const CommonFlags& flags, const RunOverrides& run_flags, const std::string& steps_text,
              const std::string& x0_rule, bool serial, std::ostream& out, std::ostream& err) {
  const std::vector<int> Ns = parse_steps(steps_text);
  if (Ns.size() < 2) usage("a study needs at least two grid counts");
  const Resolved r = resolve(flags, run_flags);
  const RunConfig cfg = r.file.run.apply(RunConfig{});
  const StartRule rule = x0_rule == "offset" ? StartRule::PathOffset : StartRule::Exact;

  const RateTable table = rate_study(r.problem, Ns, cfg, rule, !serial);
  HeaderEcho header = problem_echo(r);
  header.emplace_back("steps", steps_text);
  header.emplace_back("x0", x0_rule);
  header.emplace_back("tol_zero", format_real(cfg.tol_zero));
  emit(flags.out, out, [&](std::ostream& os) { write_rates_csv(os, table, header); });

  for (const auto& row : table.rows) {
    if (row.failed) err << "N=" << row.N << " failed: " << row.message << '\n';
  }
  const auto& last = table.rows.back();
  out << "problem=" << r.name << " rows=" << table.rows.size()
      << " final_order=" << summary_value(last.observed_order) << '\n';
  return table.all_failed() ? kExitNumerical : kExitOk;
}

int cmd_probe(const CommonFlags& flags, double t, const std::vector<double>& radii, int samples, std::uint64_t seed,
              std::ostream& out) {
  if (samples < 0) usage("--samples must be non-negative");
  for (double d : radii) {
    if (!(d > 0.0)) usage("probe radii must be positive");
  }
  const Resolved r = resolve(flags, RunOverrides{});
  if (!(t >= 0.0 && t <= r.problem.horizon)) usage("--t must lie in [0, T]");

  std::vector<ProbeReport> rows = semismooth_probe(r.problem, t, radii, samples, seed);
  for (auto& row : rows) row.kappa_hat = estimate_kappa(r.problem, t, row.delta, samples, seed).kappa_hat;

  HeaderEcho header = problem_echo(r);
  header.emplace_back("t", format_real(t));
  header.emplace_back("samples", std::to_string(samples));
  header.emplace_back("seed", std::to_string(seed));
  emit(flags.out, out, [&](std::ostream& os) { write_probe_csv(os, rows, header); });
  return kExitOk;
}

int cmd_list(bool verbose, bool json, std::ostream& out) {
  nlohmann::ordered_json catalog = nlohmann::ordered_json::array();
  for (const auto& name : problem_names()) {
    const ParametricProblem p = *make_problem(name);
    if (json) {
      catalog.push_back({{"name", name},
                         {"n", p.n},
                         {"T", p.horizon},
                         {"lambda", p.lambda},
                         {"kappa_subreg", p.kappa_subreg},
                         {"ell_path", p.ell_path},
                         {"c_mono", p.c_mono},
                         {"has_reference", p.has_reference()}});
      continue;
    }
    out << name << " n=" << p.n << " T=" << format_real(p.horizon);
    if (verbose) {
      out << " lambda=" << format_real(p.lambda) << " kappa_subreg=" << format_real(p.kappa_subreg)
          << " ell_path=" << format_real(p.ell_path) << " c_mono=" << format_real(p.c_mono);
    }
    out << '\n';
  }
  if (json) out << catalog.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Path-following for parametric generalized equations"};
  app.require_subcommand(1);

  RunOverrides run_flags;
  CommonFlags run_common;
  std::string algorithm;
  int steps = 0, i_max = 0, refine_max = 0;
  double h_max = 0, a = 0, kappa = 0, ell = 0, refine_tol = 0, tol_zero = 0;
  bool drift = false;
  auto* run = app.add_subcommand("run", "Follow the solution path and write a trajectory CSV");
  run_common.attach(run);
  auto* o_alg = run->add_option("--algorithm", algorithm, "uniform or adaptive")
                    ->check(CLI::IsMember({"uniform", "adaptive"}));
  auto* o_steps = run->add_option("--steps", steps, "Grid count N (uniform)");
  auto* o_hmax = run->add_option("--hmax", h_max, "Largest trial step (adaptive)");
  auto* o_a = run->add_option("--a", a, "Step backoff factor in (0, 1)");
  auto* o_imax = run->add_option("--imax", i_max, "Backoff attempts per step");
  auto* o_kappa = run->add_option("--kappa", kappa, "Subregularity modulus");
  auto* o_ell = run->add_option("--ell", ell, "Path Lipschitz constant");
  auto* o_rtol = run->add_option("--refine-tol", refine_tol, "Refinement tolerance");
  auto* o_rmax = run->add_option("--refine-max", refine_max, "Refinement iteration cap");
  auto* o_tol0 = run->add_option("--tol-zero", tol_zero, "Early-exit residual");
  auto* o_drift = run->add_flag("--drift,!--no-drift", drift, "Apply the source-rate drift term");

  CommonFlags study_common;
  std::string study_steps;
  std::string x0_rule = "exact";
  bool serial = false;
  auto* study = app.add_subcommand("study", "Uniform runs over several grids and a rates CSV");
  study_common.attach(study);
  study->add_option("--steps", study_steps, "Comma list or start:factor:count")->required();
  study->add_option("--x0", x0_rule, "Starting point rule")->check(CLI::IsMember({"exact", "offset"}));
  study->add_flag("--serial", serial, "Run grids one after another");

  CommonFlags probe_common;
  double probe_t = 0.0, radius = 0.0;
  std::string radii_text;
  int samples = 1000;
  std::uint64_t seed = 0;
  auto* probe = app.add_subcommand("probe", "Empirical kappa and semismoothness moduli");
  probe_common.attach(probe);
  probe->add_option("--t", probe_t, "Probe time")->required();
  auto* o_radius = probe->add_option("--radius", radius, "Single probe radius");
  auto* o_radii = probe->add_option("--radii", radii_text, "Comma list of probe radii");
  o_radius->excludes(o_radii);
  probe->add_option("--samples", samples, "Samples per radius");
  probe->add_option("--seed", seed, "Random seed");

  bool verbose = false, json = false;
  auto* list = app.add_subcommand("list", "Show the shipped problems");
  list->add_flag("--verbose", verbose, "Include default parameters");
  list->add_flag("--json", json, "Machine-readable catalog");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a_str : args) argv.push_back(a_str.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      if (o_alg->count() > 0) run_flags.algorithm = parse_algorithm(algorithm);
      if (o_steps->count() > 0) run_flags.steps = steps;
      if (o_hmax->count() > 0) run_flags.h_max = h_max;
      if (o_a->count() > 0) run_flags.backoff = a;
      if (o_imax->count() > 0) run_flags.max_backoffs = i_max;
      if (o_kappa->count() > 0) run_flags.kappa = kappa;
      if (o_ell->count() > 0) run_flags.ell = ell;
      if (o_rtol->count() > 0) run_flags.refine_tol = refine_tol;
      if (o_rmax->count() > 0) run_flags.refine_max = refine_max;
      if (o_tol0->count() > 0) run_flags.tol_zero = tol_zero;
      if (o_drift->count() > 0) run_flags.drift = drift;
      return cmd_run(run_common, run_flags, out, err);
    }
    if (study->parsed()) return cmd_study(study_common, RunOverrides{}, study_steps, x0_rule, serial, out, err);
    if (probe->parsed()) {
      std::vector<double> radii{1e-1, 1e-2, 1e-3};
      if (o_radius->count() > 0) radii = {radius};
      if (o_radii->count() > 0) radii = parse_reals(radii_text);
      return cmd_probe(probe_common, probe_t, radii, samples, seed, out);
    }
    return cmd_list(verbose, json, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const bool usage_error = e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::DimensionMismatch;
    return usage_error ? kExitUsage : kExitNumerical;
  }
}

}  // namespace pathfollow
