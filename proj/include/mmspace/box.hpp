#pragma once

// Gromov's box distance.
//
// For a fixed pair of semi-distances on a weighted index set, box_pair is
// the smallest eps for which a retained set of mass >= m - lambda*eps has
// all pairwise gaps |d1 - d2| <= eps. Between finite mm-spaces the
// parameters phi_X, phi_Y only matter through the coupling of their cell
// structure, so box_distance minimizes over couplings. Exactly: at each
// candidate eps, find the compatible set of cells (a clique in the cell
// graph) that can carry the most sub-coupling mass; any such sub-coupling
// completes to a full coupling, so that mass is what the retained set gets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mmspace/clique.hpp"
#include "mmspace/flow.hpp"
#include "mmspace/prokhorov.hpp"
#include "mmspace/space.hpp"
#include "mmspace/threshold.hpp"

namespace mmspace {

enum class SolveMode { exact, heuristic };

inline std::string to_string(SolveMode m) { return m == SolveMode::exact ? "exact" : "heuristic"; }

struct BoxOptions {
  SolveMode mode = SolveMode::exact;
  /// Exact mode refuses more candidate cells than this (hard cap 64).
  std::size_t max_cells = 64;
  std::uint64_t seed = 0;
  /// Heuristic mode: random starting couplings besides the identity order.
  std::size_t restarts = 8;
  std::size_t max_rounds = 64;
};

struct BoxResult {
  double value = 0.0;
  SolveMode mode = SolveMode::exact;
  /// box_pair: retained indices of the pair. box_distance: retained cells.
  std::vector<std::size_t> certificate;
  std::vector<Cell> cells;
  double retained_mass = 0.0;
  /// box_distance only: the optimal coupling, between X and Y after the
  /// heavier space has been rescaled to the lighter mass.
  std::optional<Coupling> coupling;
  double mass_gap = 0.0;
};

/// box_lambda(d1, d2) on a weighted index set.
inline BoxResult box_pair(const SemiDistancePair& pair, double lambda, SolveMode mode = SolveMode::exact,
                          std::size_t max_cells = kMaxCliqueVertices) {
  if (lambda < 0.0 || std::isnan(lambda)) throw DomainError("box_pair: lambda must be nonnegative");
  const std::size_t n = pair.size();
  Matrix gap(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gap(i, j) = std::abs(pair.d1(i, j) - pair.d2(i, j));
  auto r = threshold_clique(pair.weights, gap, lambda, mode == SolveMode::exact, max_cells);
  BoxResult out;
  out.value = r.value;
  out.mode = r.exact ? SolveMode::exact : SolveMode::heuristic;
  out.certificate = std::move(r.retained);
  out.retained_mass = r.retained_mass;
  for (std::size_t i : out.certificate)
    if (i < pair.cells.size()) out.cells.push_back(pair.cells[i]);
  return out;
}

namespace detail {

inline std::vector<double> gather(const std::vector<double>& w, const std::vector<std::size_t>& idx) {
  std::vector<double> out(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) out[a] = w[idx[a]];
  return out;
}

inline Matrix embed(const Matrix& small, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols,
                    std::size_t n_rows, std::size_t n_cols) {
  Matrix out(n_rows, n_cols);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) out(rows[a], cols[b]) = small(a, b);
  return out;
}

/// Exact minimization over couplings of two equal-mass spaces.
inline BoxResult box_exact_equal_mass(const FiniteMMSpace& X, const FiniteMMSpace& Y, double lambda,
                                      std::size_t max_cells) {
  const auto sx = X.support(), sy = Y.support();
  const std::size_t nx = sx.size(), ny = sy.size(), nc = nx * ny;
  const std::size_t limit = std::min(max_cells, kMaxCliqueVertices);
  if (nc > limit)
    throw SizeLimitError("exact box distance needs " + std::to_string(nc) + " cells, limit is " +
                         std::to_string(limit) + "; use heuristic mode");
  const auto supply = gather(X.weights(), sx);
  const auto demand = gather(Y.weights(), sy);
  const double m = X.total_mass();

  // cell c = (a, b) with a over sx, b over sy
  auto gap = [&](std::size_t c1, std::size_t c2) {
    return std::abs(X.d(sx[c1 / ny], sx[c2 / ny]) - Y.d(sy[c1 % ny], sy[c2 % ny]));
  };
  std::vector<double> values;
  for (std::size_t c1 = 0; c1 < nc; ++c1)
    for (std::size_t c2 = c1 + 1; c2 < nc; ++c2) values.push_back(gap(c1, c2));
  const auto thresholds = threshold_candidates(std::move(values));

  std::vector<std::uint8_t> allowed(nc);
  auto flow_of = [&](VertexSet s) {
    std::fill(allowed.begin(), allowed.end(), 0);
    for (VertexSet t = s; t; t &= t - 1) allowed[static_cast<std::size_t>(std::countr_zero(t))] = 1;
    return max_transport(supply, demand, allowed);
  };
  auto score = [&](VertexSet s) { return flow_of(s).value; };
  const VertexSet universe = nc == 64 ? ~VertexSet{0} : bit(nc) - 1;

  std::map<std::size_t, CliqueChoice> found;
  auto solve = [&](std::size_t k) -> const CliqueChoice& {
    auto it = found.find(k);
    if (it != found.end()) return it->second;
    std::vector<VertexSet> adj(nc, 0);
    for (std::size_t c1 = 0; c1 < nc; ++c1)
      for (std::size_t c2 = 0; c2 < nc; ++c2)
        if (c1 != c2 && gap(c1, c2) <= thresholds[k]) adj[c1] |= bit(c2);
    return found[k] = best_maximal_clique(adj, universe, score, score);
  };
  const auto pick = scan_thresholds(thresholds, m, lambda, [&](std::size_t k) { return solve(k).score; });

  const CliqueChoice& best = solve(pick.index);
  const TransportFlow sigma = flow_of(best.members);
  BoxResult out;
  out.value = pick.value;
  out.mode = SolveMode::exact;
  out.retained_mass = sigma.value;
  for (std::size_t c : members(best.members)) out.cells.push_back({sx[c / ny], sy[c % ny]});
  const Matrix full = complete_coupling(sigma.flow, supply, demand);
  out.coupling = Coupling(embed(full, sx, sy, X.size(), Y.size()));
  return out;
}

/// Local search over vertex couplings (north-west corner under row/column
/// orders, improved by transpositions). Every evaluated coupling is a
/// feasible point, so the result is an upper bound.
inline BoxResult box_heuristic_equal_mass(const FiniteMMSpace& X, const FiniteMMSpace& Y, double lambda,
                                          const BoxOptions& opt) {
  const auto sx = X.support(), sy = Y.support();
  const auto supply = gather(X.weights(), sx);
  const auto demand = gather(Y.weights(), sy);

  struct Candidate {
    double value;
    BoxResult result;
  };
  auto evaluate = [&](const std::vector<std::size_t>& ro, const std::vector<std::size_t>& co) {
    Coupling pi(embed(northwest_corner(supply, demand, ro, co), sx, sy, X.size(), Y.size()));
    auto pair = pullback_pair(X, Y, pi);
    const bool exact_pair = pair.size() <= std::min(opt.max_cells, kMaxCliqueVertices);
    BoxResult r = box_pair(pair, lambda, exact_pair ? SolveMode::exact : SolveMode::heuristic, opt.max_cells);
    r.certificate.clear();
    r.mode = SolveMode::heuristic;
    r.coupling = std::move(pi);
    return Candidate{r.value, std::move(r)};
  };

  std::mt19937_64 rng(opt.seed);
  std::optional<Candidate> best;
  for (std::size_t start = 0; start <= opt.restarts; ++start) {
    auto ro = iota_order(sx.size());
    auto co = iota_order(sy.size());
    if (start > 0) {
      std::shuffle(ro.begin(), ro.end(), rng);
      std::shuffle(co.begin(), co.end(), rng);
    }
    Candidate cur = evaluate(ro, co);
    for (std::size_t round = 0; round < opt.max_rounds; ++round) {
      bool improved = false;
      for (auto* order : {&ro, &co}) {
        for (std::size_t i = 0; i < order->size(); ++i)
          for (std::size_t j = i + 1; j < order->size(); ++j) {
            std::swap((*order)[i], (*order)[j]);
            Candidate next = evaluate(ro, co);
            if (next.value < cur.value - 1e-12) {
              cur = std::move(next);
              improved = true;
            } else {
              std::swap((*order)[i], (*order)[j]);
            }
          }
      }
      if (!improved) break;
    }
    if (!best || cur.value < best->value - 1e-12) best = std::move(cur);
  }
  return std::move(best->result);
}

}  // namespace detail

/// Gromov's box distance between finite mm-spaces; unequal masses are
/// handled by rescaling the heavier space and adding the mass gap.
inline BoxResult box_distance(const FiniteMMSpace& X, const FiniteMMSpace& Y, double lambda,
                              const BoxOptions& opt = {}) {
  if (lambda < 0.0 || std::isnan(lambda)) throw DomainError("box_distance: lambda must be nonnegative");
  require_valid(X);
  require_valid(Y);
  const double mx = X.total_mass(), my = Y.total_mass();
  FiniteMMSpace A = X, B = Y;
  double gap = 0.0;
  if (!same_mass(mx, my)) {
    if (mx < my) {
      B = scale_measure(Y, mx / my);
      gap = my - mx;
    } else {
      A = scale_measure(X, my / mx);
      gap = mx - my;
    }
  }
  BoxResult r = opt.mode == SolveMode::exact ? detail::box_exact_equal_mass(A, B, lambda, opt.max_cells)
                                             : detail::box_heuristic_equal_mass(A, B, lambda, opt);
  r.value += gap;
  r.mass_gap = gap;
  return r;
}

/// A witness for convergence X_n -> X: a point map, a retained subset of
/// X_n and the accuracy eps.
struct Witness {
  std::vector<std::size_t> map;     // X_n point -> X point
  std::vector<std::size_t> subset;  // retained X_n points, sorted
  double eps = 0.0;
};

/// Upper bound on box_1(X_n, X) from the coupling a witness induces: glue
/// (id, p)_* mu_{X_n} with a Prokhorov-optimal coupling of p_* mu_{X_n} and
/// mu_X, then evaluate box_pair at lambda = 1.
inline double box_upper_from_witness(const FiniteMMSpace& Xn, const FiniteMMSpace& X, const Witness& w,
                                     std::size_t max_cells = kMaxCliqueVertices) {
  if (w.map.size() != Xn.size()) throw DomainError("witness map length does not match X_n");
  for (std::size_t p : w.map)
    if (p >= X.size()) throw DomainError("witness map points outside X");
  for (std::size_t s : w.subset)
    if (s >= Xn.size()) throw DomainError("witness subset index outside X_n");

  const double mn = Xn.total_mass(), mx = X.total_mass();
  FiniteMMSpace A = Xn, B = X;
  double gap = 0.0;
  if (!same_mass(mn, mx)) {
    if (mn < mx) {
      B = scale_measure(X, mn / mx);
      gap = mx - mn;
    } else {
      A = scale_measure(Xn, mx / mn);
      gap = mn - mx;
    }
  }
  std::vector<double> pushed(B.size(), 0.0);
  for (std::size_t a = 0; a < A.size(); ++a) pushed[w.map[a]] += A.weight(a);
  const auto pk = prokhorov_coupling(B.dist(), pushed, B.weights());

  Matrix pi(A.size(), B.size());
  for (std::size_t a = 0; a < A.size(); ++a) {
    const std::size_t z = w.map[a];
    if (A.weight(a) <= 0.0 || pushed[z] <= 0.0) continue;
    for (std::size_t x = 0; x < B.size(); ++x) pi(a, x) = A.weight(a) * pk.coupling(z, x) / pushed[z];
  }
  auto pair = pullback_pair(A, B, Coupling(std::move(pi)));
  const bool exact = pair.size() <= std::min(max_cells, kMaxCliqueVertices);
  return box_pair(pair, 1.0, exact ? SolveMode::exact : SolveMode::heuristic, max_cells).value + gap;
}

}  // namespace mmspace
