#pragma once

// Matrix distributions mu_r = (K_r)_* mu^r, reconstruction-based
// isomorphism testing and exact isomorphism search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mmspace/errors.hpp"
#include "mmspace/space.hpp"

namespace mmspace {

/// Entries of an r x r matrix in units of 1e-12, row-major. Stored as
/// doubles holding integers so large distances do not overflow.
using MatrixKey = std::vector<double>;

inline constexpr double kMatrixGrid = 1e-12;

inline double grid_round(double v) { return std::nearbyint(v / kMatrixGrid); }

struct MatrixDistribution {
  std::size_t r = 0;
  std::map<MatrixKey, double> masses;
  /// Keys are grid-rounded, so equal matrices share one entry.
  bool canonical = true;

  double total() const {
    double t = 0.0;
    for (const auto& [k, m] : masses) t += m;
    return t;
  }

  MatrixDistribution normalized() const {
    MatrixDistribution out = *this;
    const double t = total();
    if (t > 0.0)
      for (auto& [k, m] : out.masses) m /= t;
    return out;
  }

  Matrix matrix(const MatrixKey& key) const {
    Matrix out(r, r);
    for (std::size_t i = 0; i < key.size(); ++i) out(i / r, i % r) = key[i] * kMatrixGrid;
    return out;
  }
};

/// K_r: the distance matrix of a tuple of points.
inline Matrix k_r(const FiniteMMSpace& space, const std::vector<std::size_t>& tuple) {
  const std::size_t r = tuple.size();
  Matrix out(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    if (tuple[i] >= space.size()) throw DomainError("k_r: point index out of range");
    for (std::size_t j = 0; j < r; ++j) out(i, j) = space.d(tuple[i], tuple[j]);
  }
  return out;
}

namespace detail {

inline MatrixKey key_of(const FiniteMMSpace& space, const std::vector<std::size_t>& tuple) {
  const std::size_t r = tuple.size();
  MatrixKey key(r * r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) key[i * r + j] = grid_round(space.d(tuple[i], tuple[j]));
  return key;
}

}  // namespace detail

inline constexpr std::size_t kDefaultMaxTuples = 10'000'000;

/// Exact mu_r by enumerating all r-tuples of support points.
inline MatrixDistribution exact_mu_r(const FiniteMMSpace& space, std::size_t r,
                                     std::size_t max_tuples = kDefaultMaxTuples) {
  if (r == 0) throw DomainError("exact_mu_r: r must be positive");
  const auto supp = space.support();
  const double n = static_cast<double>(supp.size());
  if (std::pow(n, static_cast<double>(r)) > static_cast<double>(max_tuples))
    throw SizeLimitError("exact_mu_r: " + std::to_string(supp.size()) + "^" + std::to_string(r) +
                         " tuples exceeds the limit of " + std::to_string(max_tuples));
  MatrixDistribution out;
  out.r = r;
  if (supp.empty()) return out;
  std::vector<std::size_t> pos(r, 0), tuple(r);
  for (;;) {
    double w = 1.0;
    for (std::size_t i = 0; i < r; ++i) {
      tuple[i] = supp[pos[i]];
      w *= space.weight(tuple[i]);
    }
    out.masses[detail::key_of(space, tuple)] += w;
    std::size_t i = 0;
    while (i < r && ++pos[i] == supp.size()) pos[i++] = 0;
    if (i == r) break;
  }
  return out;
}

/// Empirical mu_r from `count` i.i.d. tuples; each sample has mass 1/count.
inline MatrixDistribution sample_mu_r(const FiniteMMSpace& space, std::size_t r, std::size_t count,
                                      std::uint64_t seed) {
  if (r == 0) throw DomainError("sample_mu_r: r must be positive");
  MatrixDistribution out;
  out.r = r;
  if (count == 0) return out;
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(space.weights().begin(), space.weights().end());
  std::vector<std::size_t> tuple(r);
  const double unit = 1.0 / static_cast<double>(count);
  for (std::size_t s = 0; s < count; ++s) {
    for (auto& t : tuple) t = pick(rng);
    out.masses[detail::key_of(space, tuple)] += unit;
  }
  return out;
}

inline double total_variation(const MatrixDistribution& a, const MatrixDistribution& b) {
  double tv = 0.0;
  for (const auto& [k, m] : a.masses) {
    auto it = b.masses.find(k);
    tv += std::abs(m - (it == b.masses.end() ? 0.0 : it->second));
  }
  for (const auto& [k, m] : b.masses)
    if (!a.masses.count(k)) tv += m;
  return tv / 2.0;
}

/// Same support and masses within tol (zero-mass keys are ignored).
inline bool same_distribution(const MatrixDistribution& a, const MatrixDistribution& b, double tol = kResultTol) {
  if (a.r != b.r) return false;
  auto covers = [&](const MatrixDistribution& p, const MatrixDistribution& q) {
    for (const auto& [k, m] : p.masses) {
      auto it = q.masses.find(k);
      if (std::abs(m - (it == q.masses.end() ? 0.0 : it->second)) > tol) return false;
    }
    return true;
  };
  return covers(a, b) && covers(b, a);
}

inline constexpr std::size_t kNoPoint = std::numeric_limits<std::size_t>::max();

/// Measure-preserving isometry between the supports, as a map from points
/// of X to points of Y (kNoPoint off the support), or nothing.
inline std::optional<std::vector<std::size_t>> isomorphism_search(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                                                                  double tol = kResultTol) {
  const auto sx = X.support(), sy = Y.support();
  if (sx.size() != sy.size()) return std::nullopt;
  const std::size_t n = sx.size();

  // distance profiles: sorted distances to the other support points
  auto profile = [&](const FiniteMMSpace& S, const std::vector<std::size_t>& s, std::size_t i) {
    std::vector<double> p;
    for (std::size_t j : s) p.push_back(S.d(i, j));
    std::sort(p.begin(), p.end());
    return p;
  };
  auto close = [&](const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t k = 0; k < a.size(); ++k)
      if (std::abs(a[k] - b[k]) > tol) return false;
    return true;
  };
  std::vector<std::vector<std::uint8_t>> can(n, std::vector<std::uint8_t>(n, 0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      can[a][b] = std::abs(X.weight(sx[a]) - Y.weight(sy[b])) <= tol &&
                  close(profile(X, sx, sx[a]), profile(Y, sy, sy[b]));

  std::vector<std::size_t> image(n, kNoPoint);
  std::vector<std::uint8_t> used(n, 0);
  auto extend = [&](auto& self, std::size_t a) -> bool {
    if (a == n) return true;
    for (std::size_t b = 0; b < n; ++b) {
      if (used[b] || !can[a][b]) continue;
      bool ok = true;
      for (std::size_t c = 0; c < a && ok; ++c)
        ok = std::abs(X.d(sx[a], sx[c]) - Y.d(sy[b], sy[image[c]])) <= tol;
      if (!ok) continue;
      image[a] = b;
      used[b] = 1;
      if (self(self, a + 1)) return true;
      used[b] = 0;
    }
    image[a] = kNoPoint;
    return false;
  };
  if (!extend(extend, 0)) return std::nullopt;
  std::vector<std::size_t> out(X.size(), kNoPoint);
  for (std::size_t a = 0; a < n; ++a) out[sx[a]] = sy[image[a]];
  return out;
}

/// First r in 1..R at which the normalized matrix distributions differ.
/// Different total masses already differ at r = 1 (mu_1 is m times a point
/// mass).
inline std::optional<std::size_t> first_mu_r_mismatch(const FiniteMMSpace& X, const FiniteMMSpace& Y, std::size_t R,
                                                      std::size_t max_tuples = kDefaultMaxTuples) {
  if (!same_mass(X.total_mass(), Y.total_mass())) return 1;
  for (std::size_t r = 2; r <= R; ++r)
    if (!same_distribution(exact_mu_r(X, r, max_tuples).normalized(), exact_mu_r(Y, r, max_tuples).normalized()))
      return r;
  return std::nullopt;
}

struct ReconstructionVerdict {
  bool distinguished = false;
  std::size_t distinguishing_r = 0;  // valid when distinguished
  std::size_t max_r = 0;
  std::optional<std::vector<std::size_t>> bijection;
  /// False when the pair is indistinguishable up to max_r but no isometry
  /// exists (an anomaly worth logging).
  bool consistent = true;

  std::string verdict() const { return distinguished ? "distinguished" : "indistinguishable"; }
};

/// Compares mu_r for r = 1..R (R = 0 means the larger support size) and
/// cross-checks against isomorphism_search. An isomorphic pair that is
/// distinguished is a bug and raises InvariantError.
inline ReconstructionVerdict reconstruction_check(const FiniteMMSpace& X, const FiniteMMSpace& Y, std::size_t R = 0,
                                                  std::size_t max_tuples = kDefaultMaxTuples) {
  if (R == 0) R = std::max<std::size_t>({X.support().size(), Y.support().size(), 1});
  ReconstructionVerdict v;
  v.max_r = R;
  if (auto r = first_mu_r_mismatch(X, Y, R, max_tuples)) {
    v.distinguished = true;
    v.distinguishing_r = *r;
  }
  v.bijection = isomorphism_search(X, Y);
  if (v.bijection && v.distinguished)
    throw InvariantError("isomorphic spaces have different matrix distributions at r = " +
                         std::to_string(v.distinguishing_r));
  v.consistent = v.distinguished != v.bijection.has_value();
  return v;
}

/// Finite stand-in for a parameter: cells with masses, each lying over a
/// point of X.
struct CellDecomposition {
  std::vector<std::size_t> point_of;
  std::vector<double> masses;
};

/// Cells of a coupling of X with anything: one cell per positive entry,
/// lying over its row.
inline CellDecomposition cells_of(const Coupling& pi) {
  CellDecomposition out;
  const Matrix& m = pi.matrix();
  for (std::size_t x = 0; x < m.rows(); ++x)
    for (std::size_t y = 0; y < m.cols(); ++y)
      if (m(x, y) > 0.0) {
        out.point_of.push_back(x);
        out.masses.push_back(m(x, y));
      }
  return out;
}

/// The cell space S: cells with the inherited semi-distance.
inline FiniteMMSpace cell_space(const FiniteMMSpace& X, const CellDecomposition& cells) {
  if (cells.point_of.size() != cells.masses.size()) throw DomainError("cell decomposition: length mismatch");
  const std::size_t n = cells.point_of.size();
  Matrix d(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    if (cells.point_of[a] >= X.size()) throw DomainError("cell decomposition: point index out of range");
    for (std::size_t b = 0; b < n; ++b) d(a, b) = X.d(cells.point_of[a], cells.point_of[b]);
  }
  return FiniteMMSpace(default_labels(n), cells.masses, std::move(d));
}

/// mu_r of the cell space equals mu_r of X for r = 1..R.
inline bool parameter_invariance_check(const FiniteMMSpace& X, const CellDecomposition& cells, std::size_t R = 3,
                                       std::size_t max_tuples = kDefaultMaxTuples) {
  const FiniteMMSpace S = cell_space(X, cells);
  for (std::size_t r = 1; r <= R; ++r)
    if (!same_distribution(exact_mu_r(S, r, max_tuples), exact_mu_r(X, r, max_tuples))) return false;
  return true;
}

}  // namespace mmspace
