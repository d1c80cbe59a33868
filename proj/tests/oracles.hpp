#pragma once

// Brute-force reference computations. These deliberately avoid the library's
// solvers (no clique search, no flow, no threshold scans) so they can be
// used to check them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mmspace/space.hpp"

namespace oracle {

using mmspace::Matrix;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Smallest eps with mass(S) >= m - lambda*eps for a fixed retained set S
/// whose pairs differ by at most `spread`.
inline double subset_value(double spread, double missing, double lambda) {
  if (missing <= 1e-12) return spread;
  if (lambda == 0.0) return kInf;
  return std::max(spread, missing / lambda);
}

/// box_lambda of a weighted pair by enumerating every subset of the support.
inline double box_pair(const std::vector<double>& w, const Matrix& d1, const Matrix& d2, double lambda) {
  std::vector<std::size_t> s;
  double m = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) {
      s.push_back(i);
      m += w[i];
    }
  double best = kInf;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << s.size()); ++mask) {
    double spread = 0.0, mass = 0.0;
    for (std::size_t a = 0; a < s.size(); ++a) {
      if (!((mask >> a) & 1U)) continue;
      mass += w[s[a]];
      for (std::size_t b = 0; b < s.size(); ++b)
        if ((mask >> b) & 1U) spread = std::max(spread, std::abs(d1(s[a], s[b]) - d2(s[a], s[b])));
    }
    best = std::min(best, subset_value(spread, m - mass, lambda));
  }
  return best;
}

/// Largest transport inside an allowed cell set, via the cut formula
///   max flow = min over row sets A of  supply(rows \ A) + demand(N(A)).
inline double restricted_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                   const std::vector<std::vector<bool>>& allowed) {
  const std::size_t nr = supply.size(), nc = demand.size();
  double best = kInf;
  for (std::uint64_t A = 0; A < (std::uint64_t{1} << nr); ++A) {
    double v = 0.0;
    std::vector<bool> hit(nc, false);
    for (std::size_t i = 0; i < nr; ++i) {
      if (!((A >> i) & 1U)) {
        v += supply[i];
        continue;
      }
      for (std::size_t j = 0; j < nc; ++j)
        if (allowed[i][j]) hit[j] = true;
    }
    for (std::size_t j = 0; j < nc; ++j)
      if (hit[j]) v += demand[j];
    best = std::min(best, v);
  }
  return best;
}

/// Box distance between equal-mass spaces: minimum over every cell subset S
/// of max(spread(S), (m - transport within S) / lambda).
inline double box_distance_equal_mass(const mmspace::FiniteMMSpace& X, const mmspace::FiniteMMSpace& Y,
                                      double lambda) {
  const auto sx = X.support(), sy = Y.support();
  std::vector<double> supply, demand;
  for (std::size_t x : sx) supply.push_back(X.weight(x));
  for (std::size_t y : sy) demand.push_back(Y.weight(y));
  const double m = X.total_mass();
  const std::size_t nc = sx.size() * sy.size();
  double best = kInf;
  for (std::uint64_t S = 0; S < (std::uint64_t{1} << nc); ++S) {
    std::vector<std::vector<bool>> allowed(sx.size(), std::vector<bool>(sy.size(), false));
    double spread = 0.0;
    for (std::size_t c1 = 0; c1 < nc; ++c1) {
      if (!((S >> c1) & 1U)) continue;
      allowed[c1 / sy.size()][c1 % sy.size()] = true;
      for (std::size_t c2 = 0; c2 < nc; ++c2)
        if ((S >> c2) & 1U)
          spread = std::max(spread, std::abs(X.d(sx[c1 / sy.size()], sx[c2 / sy.size()]) -
                                             Y.d(sy[c1 % sy.size()], sy[c2 % sy.size()])));
    }
    best = std::min(best, subset_value(spread, m - restricted_transport(supply, demand, allowed), lambda));
  }
  return best;
}

/// Box distance with the mass-gap rule on top of the equal-mass oracle.
inline double box_distance(const mmspace::FiniteMMSpace& X, const mmspace::FiniteMMSpace& Y, double lambda) {
  const double mx = X.total_mass(), my = Y.total_mass();
  if (std::abs(mx - my) <= 1e-12) return box_distance_equal_mass(X, Y, lambda);
  if (mx < my) return box_distance_equal_mass(X, mmspace::scale_measure(Y, mx / my), lambda) + (my - mx);
  return box_distance_equal_mass(mmspace::scale_measure(X, my / mx), Y, lambda) + (mx - my);
}

/// The two-point family: X, Y uniform on two points with cross distances a
/// and b. Couplings are [[1/2 - t, t], [t, 1/2 - t]] for t in [0, 1/2];
/// scan a grid containing the endpoints and evaluate every cell subset.
inline double two_point_family_box(double a, double b, double lambda, int steps = 200) {
  double best = kInf;
  for (int k = 0; k <= steps; ++k) {
    const double t = 0.5 * k / steps;
    const double pi[2][2] = {{0.5 - t, t}, {t, 0.5 - t}};
    std::vector<double> w;
    std::vector<std::pair<int, int>> cells;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        if (pi[x][y] > 0.0) {
          w.push_back(pi[x][y]);
          cells.emplace_back(x, y);
        }
    Matrix d1(w.size(), w.size()), d2(w.size(), w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t j = 0; j < w.size(); ++j) {
        d1(i, j) = cells[i].first == cells[j].first ? 0.0 : a;
        d2(i, j) = cells[i].second == cells[j].second ? 0.0 : b;
      }
    best = std::min(best, box_pair(w, d1, d2, lambda));
  }
  return best;
}

/// me_lambda as the smallest candidate c with mu(|f - g| > c) <= lambda c.
inline double me_lambda(const std::vector<double>& f, const std::vector<double>& g, const std::vector<double>& w,
                        double lambda) {
  std::vector<double> cand{0.0};
  std::vector<double> h(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    h[i] = std::abs(f[i] - g[i]);
    cand.push_back(h[i]);
  }
  if (lambda > 0.0)
    for (std::size_t i = 0; i < f.size(); ++i) {
      double tail = 0.0;
      for (std::size_t j = 0; j < f.size(); ++j)
        if (h[j] >= h[i]) tail += w[j];
      cand.push_back(tail / lambda);
    }
  double best = kInf;
  for (double c : cand) {
    double above = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (w[i] > 0.0 && h[i] > c) above += w[i];
    if (above <= lambda * c + 1e-15) best = std::min(best, c);
  }
  return best;
}

/// Solves the square system A x = b; false when singular.
inline bool solve(std::vector<std::vector<double>> A, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-12) return false;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      for (std::size_t k = col; k < n; ++k) A[r][k] -= f * A[col][k];
      b[r] -= f * b[col];
    }
  }
  x.resize(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
  return true;
}

/// Vertices of { f : f_i - f_j <= d_ij, f_0 = 0 } over all n indices, by
/// trying every choice of n-1 tight constraints.
inline std::vector<std::vector<double>> lp_vertices(const Matrix& d) {
  const std::size_t n = d.rows();
  if (n == 1) return {{0.0}};
  std::vector<std::pair<std::size_t, std::size_t>> cons;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) cons.emplace_back(i, j);
  const std::size_t k = n - 1;
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  for (;;) {
    std::vector<std::vector<double>> A(k, std::vector<double>(k, 0.0));
    std::vector<double> b(k);
    for (std::size_t r = 0; r < k; ++r) {
      const auto [i, j] = cons[pick[r]];
      if (i > 0) A[r][i - 1] += 1.0;
      if (j > 0) A[r][j - 1] -= 1.0;
      b[r] = d(i, j);
    }
    std::vector<double> x;
    if (solve(A, b, x)) {
      std::vector<double> f(n, 0.0);
      for (std::size_t i = 1; i < n; ++i) f[i] = x[i - 1];
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i)
        for (std::size_t j = 0; j < n && ok; ++j) ok = f[i] - f[j] <= d(i, j) + 1e-9;
      const bool dup = std::any_of(out.begin(), out.end(), [&](const std::vector<double>& g) {
        for (std::size_t i = 0; i < n; ++i)
          if (std::abs(g[i] - f[i]) > 1e-9) return false;
        return true;
      });
      if (ok && !dup) out.push_back(f);
    }
    // next combination
    std::size_t pos = k;
    while (pos > 0 && pick[pos - 1] == cons.size() - k + pos - 1) --pos;
    if (pos == 0) break;
    ++pick[pos - 1];
    for (std::size_t r = pos; r < k; ++r) pick[r] = pick[r - 1] + 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Difference constraints x_i - x_j <= c_ij are feasible iff the constraint
/// graph has no negative cycle (Bellman-Ford from a virtual source).
inline bool difference_feasible(const Matrix& c) {
  const std::size_t n = c.rows();
  std::vector<double> dist(n, 0.0);
  for (std::size_t it = 0; it <= n; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (c(i, j) < kInf && dist[j] + c(i, j) < dist[i] - 1e-13) {
          dist[i] = dist[j] + c(i, j);
          changed = true;
        }
    if (!changed) return true;
  }
  return false;
}

/// Sup-distance from v to Lip_1(d) by bisection on t: a g with |g - v| <= t
/// and g_i - g_j <= d_ij is a difference-constraint system on (g, z) with
/// z a zero node.
inline double nearest_sup_distance(const std::vector<double>& v, const Matrix& d) {
  const std::size_t n = v.size();
  auto feasible = [&](double t) {
    Matrix c(n + 1, n + 1, kInf);
    for (std::size_t i = 0; i <= n; ++i) c(i, i) = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) c(i, j) = d(i, j);
      c(i, n) = v[i] + t;   // g_i - z <= v_i + t
      c(n, i) = t - v[i];   // z - g_i <= t - v_i
    }
    return difference_feasible(c);
  };
  double lo = 0.0, hi = 1.0;
  while (!feasible(hi)) hi *= 2.0;
  if (feasible(0.0)) return 0.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = (lo + hi) / 2.0;
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Hausdorff sup-distance between Lip_1(d1) and Lip_1(d2) on a common index
/// set with all weights positive, from the LP vertices of each polytope.
inline double hausdorff0(const Matrix& d1, const Matrix& d2) {
  auto closure = [](Matrix d) {
    const std::size_t n = d.rows();
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    return d;
  };
  double h = 0.0;
  for (const auto& v : lp_vertices(closure(d1))) h = std::max(h, nearest_sup_distance(v, d2));
  for (const auto& v : lp_vertices(closure(d2))) h = std::max(h, nearest_sup_distance(v, d1));
  return h;
}

/// Prokhorov distance by checking mu(A) <= nu(A^eps) + eps over every A at
/// every candidate eps.
inline double prokhorov(const Matrix& d, const std::vector<double>& mu, const std::vector<double>& nu) {
  const std::size_t n = mu.size();
  auto ok = [&](double eps) {
    for (std::uint64_t A = 1; A < (std::uint64_t{1} << n); ++A) {
      double ma = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if ((A >> i) & 1U) ma += mu[i];
      for (std::size_t j = 0; j < n; ++j) {
        bool near = false;
        for (std::size_t i = 0; i < n && !near; ++i) near = ((A >> i) & 1U) && d(i, j) <= eps;
        if (near) nb += nu[j];
      }
      if (ma > nb + eps + 1e-12) return false;
    }
    return true;
  };
  std::vector<double> cand{0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cand.push_back(d(i, j));
  // mass gaps mu(A) - nu(A^delta) at every distance level delta
  std::vector<double> levels = cand;
  for (double delta : levels)
    for (std::uint64_t A = 1; A < (std::uint64_t{1} << n); ++A) {
      double ma = 0.0, nb = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if ((A >> i) & 1U) ma += mu[i];
      for (std::size_t j = 0; j < n; ++j) {
        bool near = false;
        for (std::size_t i = 0; i < n && !near; ++i) near = ((A >> i) & 1U) && d(i, j) <= delta;
        if (near) nb += nu[j];
      }
      if (ma - nb > 0.0) cand.push_back(ma - nb);
    }
  double best = kInf;
  for (double c : cand)
    if (c < best && ok(c)) best = c;
  return best;
}

}  // namespace oracle
