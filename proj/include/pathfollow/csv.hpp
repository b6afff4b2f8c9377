#pragma once

// CSV writers. Numbers go through std::to_chars with 17 significant digits,
// so output never depends on the process locale. Lines end in LF.

#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathfollow/diagnostics.hpp"

namespace pathfollow {

/// `# key=value` lines written ahead of the column header.
using HeaderEcho = std::vector<std::pair<std::string, std::string>>;

[[nodiscard]] std::string format_real(double value);

/// k,t,x_1..x_n,d_1..d_n,residual,err,c_k,h,refinements
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, Eigen::Index n, const HeaderEcho& header = {});

/// N,h,max_err,observed_order
void write_rates_csv(std::ostream& out, const RateTable& table, const HeaderEcho& header = {});

/// t,delta,samples,kappa_hat,eps_hat
void write_probe_csv(std::ostream& out, std::span<const ProbeReport> rows, const HeaderEcho& header = {});

}  // namespace pathfollow
