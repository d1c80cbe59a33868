#pragma once

// Convergence and stability tools: lambda-Lipschitz-up-to-eps maps,
// convergence witnesses, empirical measures, Lipschitz domination and
// homogeneity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmspace/box.hpp"
#include "mmspace/clique.hpp"
#include "mmspace/lipschitz.hpp"
#include "mmspace/matrix_distribution.hpp"
#include "mmspace/prokhorov.hpp"
#include "mmspace/space.hpp"
#include "mmspace/threshold.hpp"

namespace mmspace {

/// Largest-mass subset X_0 on which d_Y(f x, f x') <= lambda d_X(x, x') + eps,
/// returned when mu_X(X \ X_0) <= eps. Exact up to 64 support points.
inline std::optional<std::vector<std::size_t>> lipschitz_up_to_check(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                                                                     const std::vector<std::size_t>& f, double lambda,
                                                                     double eps) {
  if (f.size() != X.size()) throw DomainError("lipschitz_up_to_check: map length does not match X");
  for (std::size_t y : f)
    if (y >= Y.size()) throw DomainError("lipschitz_up_to_check: map points outside Y");
  if (lambda < 0.0 || eps < 0.0) throw DomainError("lipschitz_up_to_check: lambda and eps must be nonnegative");
  const auto supp = X.support();
  auto ok = [&](std::size_t a, std::size_t b) {
    return Y.d(f[a], f[b]) <= lambda * X.d(a, b) + eps + kInvariantTol;
  };
  std::vector<std::size_t> keep;
  if (supp.size() <= kMaxCliqueVertices) {
    std::vector<VertexSet> adj(supp.size(), 0);
    std::vector<double> w(supp.size());
    for (std::size_t a = 0; a < supp.size(); ++a) {
      w[a] = X.weight(supp[a]);
      for (std::size_t b = 0; b < supp.size(); ++b)
        if (a != b && ok(supp[a], supp[b])) adj[a] |= bit(b);
    }
    const VertexSet universe = supp.size() == 64 ? ~VertexSet{0} : bit(supp.size()) - 1;
    for (std::size_t a : members(max_weight_clique(adj, universe, w).members)) keep.push_back(supp[a]);
  } else {
    std::vector<std::vector<bool>> compat(X.size(), std::vector<bool>(X.size(), true));
    for (std::size_t a : supp)
      for (std::size_t b : supp) compat[a][b] = ok(a, b);
    keep = greedy_clique(compat, supp, X.weights());
    std::sort(keep.begin(), keep.end());
  }
  double kept = 0.0;
  for (std::size_t a : keep) kept += X.weight(a);
  if (X.total_mass() - kept > eps + mass_tol(X.total_mass())) return std::nullopt;
  return keep;
}

enum class WitnessMode { automatic, exact, anneal };

struct WitnessOptions {
  WitnessMode mode = WitnessMode::automatic;
  /// Exact enumeration needs both supports at most this large.
  std::size_t exact_limit = 6;
  std::uint64_t seed = 0;
  std::size_t iterations = 4000;
};

struct WitnessResult {
  Witness witness;
  bool exact = true;
};

namespace detail {

struct MapScore {
  double eps = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> subset;
};

/// max(distortion on the retained set, dropped mass, Prokhorov(p_* mu_A, mu_B))
/// minimized over retained sets; A and B have equal masses.
inline MapScore score_map(const FiniteMMSpace& A, const FiniteMMSpace& B, const std::vector<std::size_t>& p) {
  std::vector<double> pushed(B.size(), 0.0);
  for (std::size_t a = 0; a < A.size(); ++a) pushed[p[a]] += A.weight(a);
  const double prok = prokhorov_coupling(B.dist(), pushed, B.weights()).value;
  const std::size_t n = A.size();
  Matrix gap(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) gap(a, b) = std::abs(A.d(a, b) - B.d(p[a], p[b]));
  auto tc = threshold_clique(A.weights(), gap, 1.0, A.support().size() <= kMaxCliqueVertices);
  return {std::max(prok, tc.value), std::move(tc.retained)};
}

}  // namespace detail

/// Best witness (p, retained subset, eps) for X_n -> X: exhaustive over all
/// point maps at desk scale, simulated annealing otherwise. Unequal masses
/// are rescaled first and the gap added to eps.
inline WitnessResult witness_search(const FiniteMMSpace& Xn, const FiniteMMSpace& X, const WitnessOptions& opt = {}) {
  require_valid(Xn);
  require_valid(X);
  const double mn = Xn.total_mass(), mx = X.total_mass();
  const FiniteMMSpace B = same_mass(mn, mx) ? X : scale_measure(X, mn / mx);
  const double gap = same_mass(mn, mx) ? 0.0 : std::abs(mn - mx);
  const auto sn = Xn.support(), sx = X.support();
  const bool small = sn.size() <= opt.exact_limit && sx.size() <= opt.exact_limit;
  if (opt.mode == WitnessMode::exact && !small)
    throw SizeLimitError("exact witness search limited to supports of " + std::to_string(opt.exact_limit) +
                         " points");
  const bool exact = opt.mode == WitnessMode::exact || (opt.mode == WitnessMode::automatic && small);

  std::vector<std::size_t> p(Xn.size(), sx.front());
  detail::MapScore best;
  std::vector<std::size_t> best_map;
  // nearest-label guess: the same index when it is a support point of X;
  // ties in the search below keep it
  for (std::size_t a : sn) p[a] = a < X.size() && X.weight(a) > 0.0 ? a : sx[a % sx.size()];
  best = detail::score_map(Xn, B, p);
  best_map = p;
  if (exact) {
    std::vector<std::size_t> pos(sn.size(), 0);
    for (;;) {
      for (std::size_t a = 0; a < sn.size(); ++a) p[sn[a]] = sx[pos[a]];
      auto s = detail::score_map(Xn, B, p);
      if (s.eps < best.eps - kInvariantTol) {
        best = std::move(s);
        best_map = p;
      }
      std::size_t a = 0;
      while (a < sn.size() && ++pos[a] == sx.size()) pos[a++] = 0;
      if (a == sn.size()) break;
    }
  } else {
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick_src(0, sn.size() - 1), pick_dst(0, sx.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto cur = best;
    const double t0 = std::max(1e-3, cur.eps / 4.0);
    for (std::size_t it = 0; it < opt.iterations; ++it) {
      const double temp = t0 * (1.0 - static_cast<double>(it) / static_cast<double>(opt.iterations)) + 1e-9;
      const std::size_t a = sn[pick_src(rng)];
      const std::size_t old = p[a];
      p[a] = sx[pick_dst(rng)];
      auto s = detail::score_map(Xn, B, p);
      if (s.eps <= cur.eps || unit(rng) < std::exp((cur.eps - s.eps) / temp)) {
        cur = std::move(s);
        if (cur.eps < best.eps - kInvariantTol) {
          best = cur;
          best_map = p;
        }
      } else {
        p[a] = old;
      }
    }
  }
  WitnessResult out;
  out.exact = exact;
  out.witness.map = std::move(best_map);
  out.witness.subset = std::move(best.subset);
  out.witness.eps = best.eps + gap;
  return out;
}

/// Checks the witness conditions on X_n: dropped mass and distortion on the
/// retained set are both at most eps.
inline bool witness_holds(const FiniteMMSpace& Xn, const FiniteMMSpace& X, const Witness& w, double tol = kResultTol) {
  if (w.map.size() != Xn.size()) return false;
  double kept = 0.0;
  for (std::size_t a : w.subset) {
    if (a >= Xn.size() || w.map[a] >= X.size()) return false;
    kept += Xn.weight(a);
  }
  if (Xn.total_mass() - kept > w.eps + tol) return false;
  for (std::size_t a : w.subset)
    for (std::size_t b : w.subset)
      if (std::abs(Xn.d(a, b) - X.d(w.map[a], w.map[b])) > w.eps + tol) return false;
  return true;
}

/// Empirical space: the points of X with mass m * count / N.
inline FiniteMMSpace empirical_space(const FiniteMMSpace& X, const std::vector<std::size_t>& counts) {
  if (counts.size() != X.size()) throw DomainError("empirical_space: counts length does not match X");
  double n = 0.0;
  for (std::size_t c : counts) n += static_cast<double>(c);
  if (n <= 0.0) throw DomainError("empirical_space: no samples");
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) w[i] = X.total_mass() * static_cast<double>(counts[i]) / n;
  return with_weights(X, std::move(w));
}

/// Sample counts of N i.i.d. draws from mu_X.
inline std::vector<std::size_t> sample_counts(const FiniteMMSpace& X, std::size_t N, std::mt19937_64& rng) {
  std::discrete_distribution<std::size_t> pick(X.weights().begin(), X.weights().end());
  std::vector<std::size_t> counts(X.size(), 0);
  for (std::size_t s = 0; s < N; ++s) ++counts[pick(rng)];
  return counts;
}

struct ConvergenceRow {
  std::size_t N = 0;
  double value = 0.0;  // mean over repeats
  SolveMode mode = SolveMode::exact;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool non_monotone = false;
  /// Last value below the first (only meaningful with at least two sizes).
  bool trend_ok = true;

  std::string csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "N,value,mode\n";
    for (const auto& r : rows) out << r.N << ',' << r.value << ',' << to_string(r.mode) << '\n';
    return out.str();
  }
};

/// box_1 between X and its empirical spaces for each sample size, averaged
/// over `repeats` independent draws. Exact when the cell graph is
/// small enough, otherwise the bound from the identity witness.
inline ConvergenceReport empirical_convergence_experiment(const FiniteMMSpace& X, const std::vector<std::size_t>& sizes,
                                                          std::uint64_t seed, std::size_t repeats = 1,
                                                          std::size_t max_cells = kMaxCliqueVertices) {
  require_valid(X);
  if (repeats == 0) throw DomainError("empirical_convergence_experiment: repeats must be positive");
  ConvergenceReport report;
  const std::size_t nsupp = X.support().size();
  const bool exact = nsupp * nsupp <= std::min(max_cells, kMaxCliqueVertices);
  for (std::size_t N : sizes) {
    ConvergenceRow row{N, 0.0, exact ? SolveMode::exact : SolveMode::heuristic};
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      // one stream per (seed, repeat, N) so adding sizes does not shift other rows
      std::seed_seq seq{seed, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(N)};
      std::mt19937_64 rng(seq);
      const FiniteMMSpace E = empirical_space(X, sample_counts(X, N, rng));
      double v = 0.0;
      if (exact) {
        v = box_distance(E, X, 1.0).value;
      } else {
        Witness w;
        w.map = iota_order(X.size());
        w.subset = E.support();
        v = box_upper_from_witness(E, X, w, max_cells);
      }
      row.value += v / static_cast<double>(repeats);
    }
    report.rows.push_back(row);
  }
  for (std::size_t i = 1; i < report.rows.size(); ++i)
    if (report.rows[i].value > report.rows[i - 1].value + kResultTol) report.non_monotone = true;
  if (report.rows.size() >= 2) report.trend_ok = report.rows.back().value < report.rows.front().value;
  return report;
}

/// X dominates Y: a 1-Lipschitz map of supports with p_* mu_X = c mu_Y.
struct DominationCertificate {
  std::vector<std::size_t> map;  // X point -> Y point, kNoPoint off the support
  double c = 1.0;
};

inline bool verify_domination(const FiniteMMSpace& X, const FiniteMMSpace& Y, const DominationCertificate& cert) {
  if (cert.map.size() != X.size() || cert.c < 1.0 - kInvariantTol) return false;
  const auto sx = X.support();
  std::vector<double> pushed(Y.size(), 0.0);
  for (std::size_t x : sx) {
    const std::size_t y = cert.map[x];
    if (y >= Y.size() || Y.weight(y) <= 0.0) return false;
    pushed[y] += X.weight(x);
  }
  for (std::size_t a : sx)
    for (std::size_t b : sx)
      if (Y.d(cert.map[a], cert.map[b]) > X.d(a, b) + kInvariantTol) return false;
  for (std::size_t y = 0; y < Y.size(); ++y)
    if (std::abs(pushed[y] - cert.c * Y.weight(y)) > kResultTol) return false;
  return true;
}

/// Certificate for X > Z from X > Y and Y > Z.
inline DominationCertificate compose(const DominationCertificate& xy, const DominationCertificate& yz) {
  DominationCertificate out;
  out.c = xy.c * yz.c;
  out.map.resize(xy.map.size(), kNoPoint);
  for (std::size_t x = 0; x < xy.map.size(); ++x)
    if (xy.map[x] != kNoPoint && xy.map[x] < yz.map.size()) out.map[x] = yz.map[xy.map[x]];
  return out;
}

/// Backtracking search for a domination certificate (c = m_X / m_Y).
inline std::optional<DominationCertificate> domination_search(const FiniteMMSpace& X, const FiniteMMSpace& Y,
                                                               std::size_t max_points = 7) {
  require_valid(X);
  require_valid(Y);
  const auto sx = X.support(), sy = Y.support();
  if (sx.size() > max_points || sy.size() > max_points)
    throw SizeLimitError("domination search limited to " + std::to_string(max_points) + " support points");
  const double c = X.total_mass() / Y.total_mass();
  if (c < 1.0 - kInvariantTol) return std::nullopt;

  // heavy points first prune the pushforward earlier
  std::vector<std::size_t> order = sx;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return X.weight(a) > X.weight(b); });
  std::vector<double> room(sy.size());
  for (std::size_t b = 0; b < sy.size(); ++b) room[b] = c * Y.weight(sy[b]);
  std::vector<std::size_t> image(X.size(), kNoPoint);
  const double tol = kResultTol;

  auto extend = [&](auto& self, std::size_t k) -> bool {
    if (k == order.size()) {
      for (double r : room)
        if (std::abs(r) > tol) return false;
      return true;
    }
    std::size_t open = 0;
    for (double r : room)
      if (r > tol) ++open;
    if (open > order.size() - k) return false;
    const std::size_t x = order[k];
    for (std::size_t b = 0; b < sy.size(); ++b) {
      if (room[b] < X.weight(x) - tol) continue;
      bool lip = true;
      for (std::size_t j = 0; j < k && lip; ++j)
        lip = Y.d(sy[b], image[order[j]]) <= X.d(x, order[j]) + kInvariantTol;
      if (!lip) continue;
      image[x] = sy[b];
      room[b] -= X.weight(x);
      if (self(self, k + 1)) return true;
      room[b] += X.weight(x);
    }
    image[x] = kNoPoint;
    return false;
  };
  if (!extend(extend, 0)) return std::nullopt;
  return DominationCertificate{image, c};
}

/// All measure-preserving isometries of the support (identity off it).
inline std::vector<std::vector<std::size_t>> isometry_group(const FiniteMMSpace& X, std::size_t max_points = 8,
                                                            double tol = kResultTol) {
  const auto s = X.support();
  if (s.size() > max_points)
    throw SizeLimitError("isometry group limited to " + std::to_string(max_points) + " support points");
  const std::size_t n = s.size();
  std::vector<std::vector<double>> prof(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b : s) prof[a].push_back(X.d(s[a], b));
    std::sort(prof[a].begin(), prof[a].end());
  }
  auto compatible = [&](std::size_t a, std::size_t b) {
    if (std::abs(X.weight(s[a]) - X.weight(s[b])) > tol) return false;
    for (std::size_t k = 0; k < n; ++k)
      if (std::abs(prof[a][k] - prof[b][k]) > tol) return false;
    return true;
  };

  std::vector<std::vector<std::size_t>> group;
  std::vector<std::size_t> image(n);
  std::vector<std::uint8_t> used(n, 0);
  auto extend = [&](auto& self, std::size_t a) -> void {
    if (a == n) {
      std::vector<std::size_t> g = iota_order(X.size());
      for (std::size_t k = 0; k < n; ++k) g[s[k]] = s[image[k]];
      group.push_back(std::move(g));
      return;
    }
    for (std::size_t b = 0; b < n; ++b) {
      if (used[b] || !compatible(a, b)) continue;
      bool ok = true;
      for (std::size_t k = 0; k < a && ok; ++k) ok = std::abs(X.d(s[a], s[k]) - X.d(s[b], s[image[k]])) <= tol;
      if (!ok) continue;
      image[a] = b;
      used[b] = 1;
      self(self, a + 1);
      used[b] = 0;
    }
  };
  extend(extend, 0);
  std::sort(group.begin(), group.end());
  return group;
}

/// The isometry group acts transitively on the support.
inline bool is_homogeneous(const FiniteMMSpace& X, std::size_t max_points = 8) {
  const auto s = X.support();
  const auto group = isometry_group(X, max_points);
  std::vector<std::uint8_t> hit(X.size(), 0);
  for (const auto& g : group) hit[g[s.front()]] = 1;
  return std::all_of(s.begin(), s.end(), [&](std::size_t x) { return hit[x] != 0; });
}

struct CauchyChain {
  double eps = 0.0;
  std::vector<std::size_t> chain;                  // indices into the map list
  std::vector<std::vector<std::size_t>> clusters;  // leader clustering at eps
};

struct Me1Diagnostic {
  Matrix pairwise;
  std::vector<CauchyChain> chains;
};

/// Pairwise me_1 distances of maps X -> Y and, for each eps, a greedy chain
/// whose members are pairwise within eps.
inline Me1Diagnostic me1_subsequence_diagnostic(const std::vector<std::vector<std::size_t>>& maps,
                                                const std::vector<double>& weights, const Matrix& dY,
                                                std::vector<double> eps_grid = {0.05, 0.1, 0.2, 0.4, 0.8}) {
  Me1Diagnostic out;
  const std::size_t k = maps.size();
  out.pairwise = Matrix(k, k);
  if (k == 0) return out;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      out.pairwise(i, j) = out.pairwise(j, i) = me_lambda_maps(maps[i], maps[j], weights, dY, 1.0);
  std::sort(eps_grid.begin(), eps_grid.end());
  for (double eps : eps_grid) {
    CauchyChain c;
    c.eps = eps;
    for (std::size_t j = 0; j < k; ++j) {
      if (std::all_of(c.chain.begin(), c.chain.end(), [&](std::size_t i) { return out.pairwise(i, j) <= eps; }))
        c.chain.push_back(j);
      auto it = std::find_if(c.clusters.begin(), c.clusters.end(),
                             [&](const std::vector<std::size_t>& cl) { return out.pairwise(cl.front(), j) <= eps; });
      if (it == c.clusters.end())
        c.clusters.push_back({j});
      else
        it->push_back(j);
    }
    out.chains.push_back(std::move(c));
  }
  return out;
}

}  // namespace mmspace
