#include "pathfollow/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace pathfollow {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
  return value;
}

std::optional<bool> parse_bool(std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  return std::nullopt;
}

template <typename T>
void take(std::optional<T>& dst, const std::optional<T>& src) {
  if (src) dst = src;
}

class LineParser {
 public:
  LineParser(std::string_view source, int line) : source_(source), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::InvalidArgument, std::string(source_) + ":" + std::to_string(line_) + ": " + what);
  }

  template <typename T>
  T number(std::string_view key, std::string_view value) const {
    auto v = parse_number<T>(value);
    if (!v) fail("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
    return *v;
  }

  void run_key(RunOverrides& run, std::string_view key, std::string_view value) const {
    if (key == "problem") {
      run.problem = std::string(value);
    } else if (key == "algorithm") {
      run.algorithm = parse_algorithm(value);
      if (!run.algorithm) fail("algorithm must be uniform or adaptive");
    } else if (key == "steps") {
      run.steps = number<int>(key, value);
    } else if (key == "h_max") {
      run.h_max = number<double>(key, value);
    } else if (key == "a") {
      run.backoff = number<double>(key, value);
    } else if (key == "i_max") {
      run.max_backoffs = number<int>(key, value);
    } else if (key == "refine_tol") {
      run.refine_tol = number<double>(key, value);
    } else if (key == "refine_max") {
      run.refine_max = number<int>(key, value);
    } else if (key == "kappa") {
      run.kappa = number<double>(key, value);
    } else if (key == "ell") {
      run.ell = number<double>(key, value);
    } else if (key == "tol_zero") {
      run.tol_zero = number<double>(key, value);
    } else if (key == "drift") {
      run.drift = parse_bool(value);
      if (!run.drift) fail("drift must be true or false");
    } else if (key == "ell_hat_factor") {
      run.ell_hat_factor = number<double>(key, value);
    } else {
      fail("unknown key '" + std::string(key) + "'");
    }
  }

  void problem_key(ProblemOverrides& pr, std::string_view key, std::string_view value) const {
    if (key == "lambda") {
      pr.lambda = number<double>(key, value);
    } else if (key == "T") {
      pr.horizon = number<double>(key, value);
    } else if (key == "kappa_subreg") {
      pr.kappa_subreg = number<double>(key, value);
    } else if (key == "ell_path") {
      pr.ell_path = number<double>(key, value);
    } else if (key == "c_mono") {
      pr.c_mono = number<double>(key, value);
    } else if (key == "g_matrix") {
      pr.g_matrix = parse_matrix(value);
      if (!pr.g_matrix) fail("g_matrix must look like 'a, b; c, d'");
    } else if (key == "diode_ordering") {
      pr.diode_ordering = parse_ordering(value);
      if (!pr.diode_ordering) fail("diode_ordering must be monotone or crossed");
    } else {
      fail("unknown problem key '" + std::string(key) + "'");
    }
  }

 private:
  std::string_view source_;
  int line_;
};

}  // namespace

void RunOverrides::merge(const RunOverrides& over) {
  take(problem, over.problem);
  take(algorithm, over.algorithm);
  take(steps, over.steps);
  take(h_max, over.h_max);
  take(backoff, over.backoff);
  take(max_backoffs, over.max_backoffs);
  take(refine_tol, over.refine_tol);
  take(refine_max, over.refine_max);
  take(kappa, over.kappa);
  take(ell, over.ell);
  take(tol_zero, over.tol_zero);
  take(drift, over.drift);
  take(ell_hat_factor, over.ell_hat_factor);
}

RunConfig RunOverrides::apply(RunConfig base) const {
  base.algorithm = algorithm.value_or(base.algorithm);
  base.steps = steps.value_or(base.steps);
  base.h_max = h_max.value_or(base.h_max);
  base.backoff = backoff.value_or(base.backoff);
  base.max_backoffs = max_backoffs.value_or(base.max_backoffs);
  base.refine_tol = refine_tol.value_or(base.refine_tol);
  base.refine_max = refine_max.value_or(base.refine_max);
  base.kappa = kappa.value_or(base.kappa);
  base.ell = ell.value_or(base.ell);
  base.tol_zero = tol_zero.value_or(base.tol_zero);
  base.drift = drift.value_or(base.drift);
  base.ell_hat_factor = ell_hat_factor.value_or(base.ell_hat_factor);
  return base;
}

void ProblemOverrides::merge(const ProblemOverrides& over) {
  take(lambda, over.lambda);
  take(horizon, over.horizon);
  take(kappa_subreg, over.kappa_subreg);
  take(ell_path, over.ell_path);
  take(c_mono, over.c_mono);
  take(g_matrix, over.g_matrix);
  take(diode_ordering, over.diode_ordering);
}

ProblemOverrides ConfigFile::problem(std::string_view name) const {
  const auto it = problems.find(name);
  return it == problems.end() ? ProblemOverrides{} : it->second;
}

ConfigFile parse_config(std::string_view text, std::string_view source) {
  ConfigFile cfg;
  ProblemOverrides* section = nullptr;
  int line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    LineParser lp(source, line_no);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') lp.fail("unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      constexpr std::string_view prefix = "problem.";
      if (!name.starts_with(prefix)) lp.fail("unknown section '" + std::string(name) + "'");
      const std::string problem(name.substr(prefix.size()));
      const auto& known = problem_names();
      if (std::find(known.begin(), known.end(), problem) == known.end()) {
        lp.fail("unknown problem '" + problem + "'");
      }
      if (cfg.problems.contains(problem)) lp.fail("duplicate section for " + problem);
      section = &cfg.problems[problem];
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) lp.fail("expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) lp.fail("empty key");
    if (section) {
      lp.problem_key(*section, key, value);
    } else {
      lp.run_key(cfg.run, key, value);
    }
  }
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

ParametricProblem resolve_problem(std::string_view name, const ProblemOverrides& over) {
  std::optional<ParametricProblem> pr;
  if (name == "transistor" && (over.g_matrix || over.diode_ordering)) {
    pr = make_transistor(over.g_matrix, over.diode_ordering.value_or(BranchOrdering::Crossed));
  } else if (over.g_matrix || over.diode_ordering) {
    throw Error(ErrorKind::InvalidArgument, "g_matrix and diode_ordering only apply to the transistor");
  } else {
    pr = make_problem(name);
  }
  if (!pr) throw Error(ErrorKind::InvalidArgument, "unknown problem '" + std::string(name) + "'");

  if (over.lambda) {
    if (!(*over.lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
    pr->lambda = *over.lambda;
  }
  if (over.horizon) {
    if (!(*over.horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
    pr->horizon = *over.horizon;
  }
  if (over.kappa_subreg) pr->kappa_subreg = *over.kappa_subreg;
  if (over.ell_path) pr->ell_path = *over.ell_path;
  if (over.c_mono) pr->c_mono = *over.c_mono;
  return *std::move(pr);
}

std::optional<Algorithm> parse_algorithm(std::string_view text) {
  if (text == "uniform") return Algorithm::Uniform;
  if (text == "adaptive") return Algorithm::Adaptive;
  return std::nullopt;
}

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::Uniform ? "uniform" : "adaptive";
}

std::optional<BranchOrdering> parse_ordering(std::string_view text) {
  text = trim(text);
  if (text == "monotone") return BranchOrdering::Monotone;
  if (text == "crossed") return BranchOrdering::Crossed;
  return std::nullopt;
}

std::optional<Matrix> parse_matrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  while (true) {
    const auto semi = text.find(';');
    std::string_view row_text = text.substr(0, semi);
    std::vector<double> row;
    while (true) {
      const auto comma = row_text.find(',');
      auto v = parse_number<double>(row_text.substr(0, comma));
      if (!v) return std::nullopt;
      row.push_back(*v);
      if (comma == std::string_view::npos) break;
      row_text = row_text.substr(comma + 1);
    }
    if (!rows.empty() && row.size() != rows.front().size()) return std::nullopt;
    rows.push_back(std::move(row));
    if (semi == std::string_view::npos) break;
    text = text.substr(semi + 1);
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

}  // namespace pathfollow
