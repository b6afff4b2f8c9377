#include "pathfollow/monotone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pathfollow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Branch { Zero, Positive, Negative, Affine };

struct Candidate {
  double x;
  Branch branch;
  double u;  // sqrt(|x|) on the curved branches
};

// Positive root of u^2 + lambda u = c for c > 0, without cancellation.
double sqrt_branch_root(double lambda, double c) {
  return 2.0 * c / (lambda + std::sqrt(lambda * lambda + 4.0 * c));
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "resolvent parameter must be positive");
  }
}

std::vector<Candidate> candidates(const ScalarMonotoneMap& map, double lambda, double z) {
  std::vector<Candidate> out;
  switch (map.kind()) {
    case MapKind::IdealDiode:
      out.push_back({std::max(z, 0.0), z > 0.0 ? Branch::Positive : Branch::Zero, 0.0});
      break;
    case MapKind::AffineBranch: {
      const double denom = 1.0 + lambda * map.slope();
      if (std::abs(denom) > 1e-14) out.push_back({(z - lambda * map.offset()) / denom, Branch::Affine, 0.0});
      break;
    }
    case MapKind::PracticalDiode: {
      if (z >= lambda * map.v1() && z <= lambda * map.v2()) out.push_back({0.0, Branch::Zero, 0.0});
      const double pos = lambda * map.positive_offset();
      if (z > pos) {
        const double u = sqrt_branch_root(lambda, z - pos);
        out.push_back({u * u, Branch::Positive, u});
      }
      const double neg = lambda * map.negative_offset();
      if (z < neg) {
        const double u = sqrt_branch_root(lambda, neg - z);
        out.push_back({-u * u, Branch::Negative, u});
      }
      break;
    }
  }
  return out;
}

Candidate select(const ScalarMonotoneMap& map, double lambda, double z, std::optional<double> hint) {
  check_lambda(lambda);
  const auto cands = candidates(map, lambda, z);
  if (cands.empty()) {
    throw Error(ErrorKind::NoSolution, "z = " + std::to_string(z) + " outside the range of I + lambda F");
  }
  const double target = hint.value_or(0.0);
  // Ties keep the earlier candidate (zero, positive, negative).
  auto best = std::min_element(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& b) {
    return std::abs(a.x - target) < std::abs(b.x - target);
  });
  return *best;
}

}  // namespace

ScalarMonotoneMap ScalarMonotoneMap::ideal_diode() {
  return ScalarMonotoneMap(MapKind::IdealDiode, 0.0, 0.0, BranchOrdering::Monotone);
}

ScalarMonotoneMap ScalarMonotoneMap::practical_diode(double v1, double v2, BranchOrdering ordering) {
  if (!(v1 < v2)) throw Error(ErrorKind::InvalidArgument, "practical diode requires V1 < V2");
  return ScalarMonotoneMap(MapKind::PracticalDiode, v1, v2, ordering);
}

ScalarMonotoneMap ScalarMonotoneMap::affine(double slope, double offset) {
  return ScalarMonotoneMap(MapKind::AffineBranch, slope, offset, BranchOrdering::Monotone);
}

double ScalarMonotoneMap::positive_offset() const noexcept {
  return ordering_ == BranchOrdering::Monotone ? b_ : a_;
}

double ScalarMonotoneMap::negative_offset() const noexcept {
  return ordering_ == BranchOrdering::Monotone ? a_ : b_;
}

bool ScalarMonotoneMap::is_maximal_monotone() const noexcept {
  switch (kind_) {
    case MapKind::IdealDiode: return true;
    case MapKind::PracticalDiode: return ordering_ == BranchOrdering::Monotone;
    case MapKind::AffineBranch: return a_ >= 0.0;
  }
  return false;
}

double membership_residual(const ScalarMonotoneMap& map, double x, double y) {
  switch (map.kind()) {
    case MapKind::IdealDiode:
      if (x > 0.0) return std::abs(y);
      if (x == 0.0) return std::max(y, 0.0);
      return kInf;
    case MapKind::AffineBranch:
      return std::abs(y - (map.slope() * x + map.offset()));
    case MapKind::PracticalDiode:
      if (x == 0.0) return std::max({map.v1() - y, y - map.v2(), 0.0});
      if (x > 0.0) return std::abs(y - (map.positive_offset() + std::sqrt(x)));
      return std::abs(y - (map.negative_offset() - std::sqrt(-x)));
  }
  return kInf;
}

double resolvent(const ScalarMonotoneMap& map, double lambda, double z, std::optional<double> hint) {
  return select(map, lambda, z, hint).x;
}

SlopeSet resolvent_slopes(const ScalarMonotoneMap& map, double lambda, double z, std::optional<double> hint) {
  const Candidate c = select(map, lambda, z, hint);
  switch (map.kind()) {
    case MapKind::IdealDiode:
      if (z > 0.0) return {1.0};
      if (z < 0.0) return {0.0};
      return {0.0, 1.0};
    case MapKind::AffineBranch:
      return {1.0 / (1.0 + lambda * map.slope())};
    case MapKind::PracticalDiode:
      // d|x|/dz = 2u / (2u + lambda) on both curved branches; it tends to 0
      // at the segment ends, so the one-sided limits at a breakpoint agree.
      if (c.branch == Branch::Zero) return {0.0};
      return {2.0 * c.u / (2.0 * c.u + lambda)};
  }
  return {0.0};
}

bool ProductMap::is_maximal_monotone() const noexcept {
  return std::all_of(components_.begin(), components_.end(),
                     [](const ScalarMonotoneMap& m) { return m.is_maximal_monotone(); });
}

namespace {

void check_dim(const ProductMap& map, const Vector& v, const char* what) {
  if (v.size() != map.dim()) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + " has length " + std::to_string(v.size()) +
                                                  ", map has dimension " + std::to_string(map.dim()));
  }
}

std::optional<double> hint_at(const Vector* hint, Eigen::Index i) {
  if (hint == nullptr) return std::nullopt;
  return (*hint)(i);
}

}  // namespace

double membership_residual(const ProductMap& map, const Vector& x, const Vector& y) {
  check_dim(map, x, "x");
  check_dim(map, y, "y");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < map.dim(); ++i) {
    const double r = membership_residual(map[i], x(i), y(i));
    sum += r * r;
  }
  return std::sqrt(sum);
}

Vector resolvent(const ProductMap& map, double lambda, const Vector& z, const Vector* hint) {
  check_dim(map, z, "z");
  if (hint != nullptr) check_dim(map, *hint, "hint");
  Vector out(map.dim());
  for (Eigen::Index i = 0; i < map.dim(); ++i) out(i) = resolvent(map[i], lambda, z(i), hint_at(hint, i));
  return out;
}

std::vector<Matrix> resolvent_slopes(const ProductMap& map, double lambda, const Vector& z, const Vector* hint) {
  check_dim(map, z, "z");
  if (hint != nullptr) check_dim(map, *hint, "hint");
  const Eigen::Index n = map.dim();
  std::vector<SlopeSet> sets;
  sets.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sets.push_back(resolvent_slopes(map[i], lambda, z(i), hint_at(hint, i)));

  const std::size_t cap = n < 62 ? (std::size_t{1} << n) : std::numeric_limits<std::size_t>::max();
  std::vector<Matrix> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  while (out.size() < cap) {
    Matrix J = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) J(i, i) = sets[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
    out.push_back(std::move(J));
    // Odometer increment, last coordinate fastest.
    Eigen::Index pos = n - 1;
    while (pos >= 0) {
      auto& k = idx[static_cast<std::size_t>(pos)];
      if (++k < sets[static_cast<std::size_t>(pos)].size()) break;
      k = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace pathfollow
