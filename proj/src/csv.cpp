#include "pathfollow/csv.hpp"

#include <charconv>
#include <cmath>
#include <optional>

namespace pathfollow {

namespace {

void write_header(std::ostream& out, const HeaderEcho& header) {
  for (const auto& [key, value] : header) out << "# " << key << '=' << value << '\n';
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, Eigen::Index n, const HeaderEcho& header) {
  write_header(out, header);
  out << "k,t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",d_" << i;
  out << ",residual,err,c_k,h,refinements\n";
  for (const auto& rec : traj.records) {
    std::string line = std::to_string(rec.k) + ',' + format_real(rec.t);
    for (Eigen::Index i = 0; i < n; ++i) line += ',' + format_real(rec.x(i));
    for (Eigen::Index i = 0; i < n; ++i) line += ',' + format_real(rec.d(i));
    line += ',' + format_real(rec.residual);
    line += ',' + optional_real(rec.err);
    line += ',' + optional_real(rec.c_k);
    line += ',' + optional_real(rec.h);
    line += ',' + std::to_string(rec.refinements);
    out << line << '\n';
  }
}

void write_rates_csv(std::ostream& out, const RateTable& table, const HeaderEcho& header) {
  write_header(out, header);
  out << "N,h,max_err,observed_order\n";
  for (const auto& row : table.rows) {
    out << row.N << ',' << format_real(row.h) << ',' << optional_real(row.max_err) << ','
        << optional_real(row.observed_order) << '\n';
  }
}

void write_probe_csv(std::ostream& out, std::span<const ProbeReport> rows, const HeaderEcho& header) {
  write_header(out, header);
  out << "t,delta,samples,kappa_hat,eps_hat\n";
  for (const auto& r : rows) {
    out << format_real(r.t) << ',' << format_real(r.delta) << ',' << r.samples << ',' << format_real(r.kappa_hat)
        << ',' << format_real(r.eps_hat) << '\n';
  }
}

}  // namespace pathfollow
