#pragma once

// me_lambda, the 1-Lipschitz polytopes Lip_1(d) and the observable
// distance H_lambda Li_1.
//
// Lip_1(d) only depends on the shortest-path closure D of d and is invariant
// under adding constants, so Hausdorff distances are taken over the polytope
// pinned at a basepoint. Two facts drive the exact computations:
//
//  * the sup-distance from v to Lip_1(D) is  max_{i,j} (v_i - v_j - D_ij)^+ / 2,
//    attained by the McShane extension of v + t;
//  * for lambda > 0 the me_lambda-distance from f to Lip_1(D) is a threshold
//    clique problem with gaps (|f_i - f_j| - D_ij)^+ / 2: drop a set of
//    mass <= lambda*eps and fit the rest within eps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mmspace/box.hpp"
#include "mmspace/space.hpp"
#include "mmspace/threshold.hpp"

namespace mmspace {

/// Shortest-path closure (Floyd-Warshall).
inline Matrix shortest_path_closure(const Matrix& d) {
  Matrix D = d;
  const std::size_t n = D.rows();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) D(i, j) = std::min(D(i, j), D(i, k) + D(k, j));
  return D;
}

/// me_lambda(f, g) = inf { eps > 0 : mu(|f - g| >= eps) <= lambda * eps }.
inline double me_lambda(std::span<const double> f, std::span<const double> g, std::span<const double> weights,
                        double lambda) {
  if (f.size() != g.size() || f.size() != weights.size()) throw DomainError("me_lambda: length mismatch");
  if (lambda < 0.0 || std::isnan(lambda)) throw DomainError("me_lambda: lambda must be nonnegative");
  std::vector<std::pair<double, double>> level;  // (|f - g|, mass), positive only
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double h = std::abs(f[i] - g[i]);
    if (weights[i] > 0.0 && h > 0.0) level.emplace_back(h, weights[i]);
  }
  if (level.empty()) return 0.0;
  std::sort(level.begin(), level.end(), [](auto& a, auto& b) { return a.first > b.first; });
  double best = level.front().first;  // every eps above the largest gap works
  if (lambda == 0.0) return best;
  // For eps in (v_{k+1}, v_k] the bad mass is the tail through level k.
  double tail = 0.0;
  for (std::size_t i = 0; i < level.size(); ++i) {
    tail += level[i].second;
    if (i + 1 < level.size() && level[i + 1].first == level[i].first) continue;
    const double below = i + 1 < level.size() ? level[i + 1].first : 0.0;
    best = std::min(best, std::max(below, tail / lambda));
  }
  return best;
}

/// me_lambda of x -> d_Y(F(x), G(x)) against zero, for maps into the points of Y.
inline double me_lambda_maps(std::span<const std::size_t> F, std::span<const std::size_t> G,
                             std::span<const double> weights, const Matrix& dY, double lambda) {
  if (F.size() != G.size() || F.size() != weights.size()) throw DomainError("me_lambda_maps: length mismatch");
  std::vector<double> h(F.size()), zero(F.size(), 0.0);
  for (std::size_t i = 0; i < F.size(); ++i) {
    if (F[i] >= dY.rows() || G[i] >= dY.rows()) throw DomainError("me_lambda_maps: map outside target");
    h[i] = dY(F[i], G[i]);
  }
  return me_lambda(h, zero, weights, lambda);
}

/// McShane inf-convolution  x -> min_{y in anchor} f(y) + D(x, y).
inline std::vector<double> project_to_lip1(std::span<const double> f, const Matrix& d,
                                           std::span<const std::size_t> anchor) {
  if (anchor.empty()) throw DomainError("project_to_lip1: empty anchor");
  if (d.rows() != f.size()) throw DomainError("project_to_lip1: length mismatch");
  const Matrix D = shortest_path_closure(d);
  std::vector<double> out(f.size(), std::numeric_limits<double>::infinity());
  for (std::size_t x = 0; x < f.size(); ++x)
    for (std::size_t y : anchor) {
      if (y >= f.size()) throw DomainError("project_to_lip1: anchor index out of range");
      out[x] = std::min(out[x], f[y] + D(x, y));
    }
  return out;
}

/// Lip_1(d) over a weighted index set, pinned at the first support point.
class LipschitzSet {
 public:
  LipschitzSet(const Matrix& d, std::span<const double> weights)
      : d_(d), closure_(shortest_path_closure(d)), weights_(weights.begin(), weights.end()) {
    for (std::size_t i = 0; i < weights_.size(); ++i)
      if (weights_[i] > 0.0) support_.push_back(i);
    if (support_.empty()) throw DomainError("LipschitzSet: empty support");
  }

  const Matrix& distances() const { return d_; }
  const Matrix& closure() const { return closure_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::size_t>& support() const { return support_; }
  std::size_t basepoint() const { return support_.front(); }

  bool contains(std::span<const double> f, double tol = kInvariantTol) const {
    if (f.size() != weights_.size()) return false;
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j)
        if (f[i] - f[j] > d_(i, j) + tol) return false;
    return true;
  }

 private:
  Matrix d_;
  Matrix closure_;
  std::vector<double> weights_;
  std::vector<std::size_t> support_;
};

namespace detail {

/// Support points grouped by zero closure distance; functions in Lip_1 are
/// constant on each group.
struct Quotient {
  std::vector<std::size_t> rep;       // class -> representative index
  std::vector<std::size_t> class_of;  // index -> class (support only)
};

inline Quotient quotient(const Matrix& D, const std::vector<std::size_t>& support) {
  Quotient q;
  q.class_of.assign(D.rows(), std::numeric_limits<std::size_t>::max());
  for (std::size_t i : support) {
    for (std::size_t c = 0; c < q.rep.size(); ++c)
      if (D(i, q.rep[c]) <= 0.0) {
        q.class_of[i] = c;
        break;
      }
    if (q.class_of[i] == std::numeric_limits<std::size_t>::max()) {
      q.class_of[i] = q.rep.size();
      q.rep.push_back(i);
    }
  }
  return q;
}

/// Edge lists of all labelled trees on k vertices (Pruefer decoding).
inline std::vector<std::vector<std::pair<std::size_t, std::size_t>>> labelled_trees(std::size_t k) {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out;
  if (k <= 1) {
    out.emplace_back();
    return out;
  }
  if (k == 2) {
    out.push_back({{0, 1}});
    return out;
  }
  std::vector<std::size_t> seq(k - 2, 0);
  for (;;) {
    std::vector<std::size_t> degree(k, 1);
    for (std::size_t s : seq) ++degree[s];
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t s : seq) {
      for (std::size_t leaf = 0; leaf < k; ++leaf)
        if (degree[leaf] == 1) {
          edges.emplace_back(std::min(leaf, s), std::max(leaf, s));
          --degree[leaf];
          --degree[s];
          break;
        }
    }
    std::size_t u = k, v = k;
    for (std::size_t i = 0; i < k; ++i)
      if (degree[i] == 1) (u == k ? u : v) = i;
    edges.emplace_back(u, v);
    out.push_back(std::move(edges));
    // odometer
    std::size_t pos = 0;
    while (pos < seq.size() && ++seq[pos] == k) seq[pos++] = 0;
    if (pos == seq.size()) break;
  }
  return out;
}

}  // namespace detail

/// Extreme points of { f : f_i - f_j <= d_ij, f_base = 0 } restricted to
/// the support (base = first support point). Vertices are the functions
/// fixed by a spanning tree of tight constraints, so they are enumerated
/// over labelled trees and edge orientations on the zero-distance quotient.
/// Values off the support are filled by the McShane extension.
inline std::vector<std::vector<double>> lip1_vertices(const Matrix& d, std::span<const double> weights,
                                                      std::size_t max_classes = 6) {
  LipschitzSet set(d, weights);
  const Matrix& D = set.closure();
  const auto q = detail::quotient(D, set.support());
  const std::size_t k = q.rep.size();
  if (k > max_classes)
    throw SizeLimitError("lip1_vertices: " + std::to_string(k) + " distinct support points, limit is " +
                         std::to_string(max_classes));

  std::vector<std::vector<double>> found;
  const std::size_t base = q.class_of[set.basepoint()];
  for (const auto& edges : detail::labelled_trees(k)) {
    for (std::uint64_t orient = 0; orient < (std::uint64_t{1} << edges.size()); ++orient) {
      std::vector<double> f(k, std::numeric_limits<double>::quiet_NaN());
      f[base] = 0.0;
      bool progress = true;
      while (progress) {
        progress = false;
        for (std::size_t e = 0; e < edges.size(); ++e) {
          const auto [a, b] = edges[e];
          const double len = D(q.rep[a], q.rep[b]);
          const double sign = (orient >> e) & 1U ? 1.0 : -1.0;  // f_b - f_a = sign * len
          if (!std::isnan(f[a]) && std::isnan(f[b])) {
            f[b] = f[a] + sign * len;
            progress = true;
          } else if (std::isnan(f[a]) && !std::isnan(f[b])) {
            f[a] = f[b] - sign * len;
            progress = true;
          }
        }
      }
      bool feasible = true;
      for (std::size_t a = 0; a < k && feasible; ++a)
        for (std::size_t b = 0; b < k && feasible; ++b)
          if (f[a] - f[b] > D(q.rep[a], q.rep[b]) + 1e-12) feasible = false;
      if (!feasible) continue;
      const bool dup = std::any_of(found.begin(), found.end(), [&](const std::vector<double>& g) {
        for (std::size_t a = 0; a < k; ++a)
          if (std::abs(g[a] - f[a]) > 1e-9) return false;
        return true;
      });
      if (!dup) found.push_back(std::move(f));
    }
  }
  std::sort(found.begin(), found.end());

  std::vector<std::vector<double>> out;
  out.reserve(found.size());
  for (const auto& f : found) {
    std::vector<double> full(weights.size(), 0.0);
    for (std::size_t i : set.support()) full[i] = f[q.class_of[i]];
    std::vector<double> lifted = project_to_lip1(full, D, set.support());
    for (std::size_t i : set.support()) lifted[i] = full[i];
    out.push_back(std::move(lifted));
  }
  return out;
}

/// Sup-distance over `support` from v to Lip_1(D); D must be a closure.
inline double nearest_sup_distance(std::span<const double> v, const Matrix& D,
                                   std::span<const std::size_t> support) {
  double t = 0.0;
  for (std::size_t i : support)
    for (std::size_t j : support) t = std::max(t, (v[i] - v[j] - D(i, j)) / 2.0);
  return t;
}

/// A nearest point of Lip_1(D) to v in sup-distance over the support.
inline std::vector<double> nearest_lip1_point(std::span<const double> v, const Matrix& D,
                                              std::span<const std::size_t> support) {
  const double t = nearest_sup_distance(v, D, support);
  std::vector<double> shifted(v.begin(), v.end());
  for (double& x : shifted) x += t;
  return project_to_lip1(shifted, D, support);
}

/// inf over g in Lip_1(D) of me_lambda(f, g), exact (clique search) or an
/// upper bound (greedy) for large supports.
inline double distance_to_lip1(std::span<const double> f, const Matrix& D, std::span<const double> weights,
                               double lambda, bool exact = true) {
  const std::size_t n = f.size();
  Matrix gap(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gap(i, j) = std::max(0.0, std::abs(f[i] - f[j]) - D(i, j)) / 2.0;
  return threshold_clique(weights, gap, lambda, exact).value;
}

enum class HliMode { exact0, sampled };
enum class BoundTag { exact, lower_bound, heuristic };

inline std::string to_string(HliMode m) { return m == HliMode::exact0 ? "exact0" : "sampled"; }
inline std::string to_string(BoundTag t) {
  switch (t) {
    case BoundTag::exact:
      return "exact";
    case BoundTag::lower_bound:
      return "lower-bound";
    default:
      return "heuristic";
  }
}

struct BoundedValue {
  double value = 0.0;
  BoundTag tag = BoundTag::exact;
};

struct HliOptions {
  std::size_t samples = 256;
  std::uint64_t seed = 0;
  std::size_t max_classes = 6;
};

namespace detail {

/// Random members of Lip_1(D): cone combinations on a random anchor,
/// McShane-extended, plus the cones +-D(., j) themselves.
inline std::vector<std::vector<double>> sample_lip1(const Matrix& D, const std::vector<std::size_t>& support,
                                                    std::size_t count, std::mt19937_64& rng) {
  const std::size_t n = D.rows();
  std::vector<std::vector<double>> out;
  for (std::size_t j : support)
    for (double s : {1.0, -1.0}) {
      std::vector<double> f(n);
      for (std::size_t i = 0; i < n; ++i) f[i] = s * D(i, j);
      out.push_back(std::move(f));
    }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<std::size_t> pool = support;
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t anchor_size = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(pool.size())) %
                                            pool.size();
    std::vector<std::size_t> anchor(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(anchor_size));
    std::vector<std::size_t> centers = support;
    std::shuffle(centers.begin(), centers.end(), rng);
    const std::size_t nc = 1 + static_cast<std::size_t>(unit(rng) * 3.0) % centers.size();
    std::vector<double> coef(nc), sign(nc);
    double total = 0.0;
    for (std::size_t a = 0; a < nc; ++a) {
      coef[a] = unit(rng) + 1e-3;
      total += coef[a];
      sign[a] = unit(rng) < 0.5 ? -1.0 : 1.0;
    }
    std::vector<double> f(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < nc; ++a) f[i] += coef[a] / total * sign[a] * D(i, centers[a]);
    out.push_back(project_to_lip1(f, D, anchor));
  }
  return out;
}

}  // namespace detail

/// H_lambda Li_1(d1, d2): Hausdorff distance between Lip_1(d1) and Lip_1(d2)
/// in me_lambda. exact0 (lambda = 0) maximizes the exact nearest distance
/// over the vertices of each polytope. sampled maximizes exact per-sample
/// distances over random members, which is a lower bound.
inline BoundedValue hli_lambda(const SemiDistancePair& pair, double lambda, HliMode mode,
                               const HliOptions& opt = {}) {
  if (lambda < 0.0 || std::isnan(lambda)) throw DomainError("hli_lambda: lambda must be nonnegative");
  LipschitzSet L1(pair.d1, pair.weights), L2(pair.d2, pair.weights);
  const auto& supp = L1.support();

  if (mode == HliMode::exact0) {
    if (lambda != 0.0) throw DomainError("hli_lambda: exact0 mode requires lambda = 0");
    double h = 0.0;
    for (const auto& v : lip1_vertices(pair.d1, pair.weights, opt.max_classes))
      h = std::max(h, nearest_sup_distance(v, L2.closure(), supp));
    for (const auto& v : lip1_vertices(pair.d2, pair.weights, opt.max_classes))
      h = std::max(h, nearest_sup_distance(v, L1.closure(), supp));
    return {h, BoundTag::exact};
  }

  const bool exact = supp.size() <= kMaxCliqueVertices;
  std::mt19937_64 rng(opt.seed);
  double h = 0.0;
  for (auto [from, to] : {std::pair{&L1, &L2}, std::pair{&L2, &L1}})
    for (const auto& f : detail::sample_lip1(from->closure(), supp, opt.samples, rng))
      h = std::max(h, distance_to_lip1(f, to->closure(), pair.weights, lambda, exact));
  return {h, exact ? BoundTag::lower_bound : BoundTag::heuristic};
}

struct ObservableOptions {
  HliOptions hli;
  BoxOptions box;
  /// exact0 refuses supports with more cells than this.
  std::size_t max_support_cells = 9;
};

/// Observable distance between finite mm-spaces (infimum over couplings of
/// hli_lambda of the pullback), with the same mass-gap rule as the box
/// distance.
inline BoundedValue observable_distance(const FiniteMMSpace& X, const FiniteMMSpace& Y, double lambda, HliMode mode,
                                        const ObservableOptions& opt = {}) {
  if (lambda < 0.0 || std::isnan(lambda)) throw DomainError("observable_distance: lambda must be nonnegative");
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

  if (mode == HliMode::exact0) {
    if (lambda != 0.0) throw DomainError("observable_distance: exact0 mode requires lambda = 0");
    const std::size_t cells = A.support().size() * B.support().size();
    if (cells > opt.max_support_cells)
      throw SizeLimitError("observable_distance exact0: " + std::to_string(cells) + " support cells, limit is " +
                           std::to_string(opt.max_support_cells));
    // Couplings feasible at the smallest full-mass threshold of the cell
    // graph minimize the pulled-back Hausdorff distance at lambda = 0.
    BoxOptions bo = opt.box;
    bo.mode = SolveMode::exact;
    const auto box = box_distance(A, B, 0.0, bo);
    const auto pair = pullback_pair(A, B, *box.coupling);
    const auto h = hli_lambda(pair, 0.0, HliMode::exact0, opt.hli);
    return {h.value + gap, BoundTag::exact};
  }

  std::vector<Coupling> couplings;
  {
    BoxOptions bo = opt.box;
    const std::size_t cells = A.support().size() * B.support().size();
    if (cells > std::min(bo.max_cells, kMaxCliqueVertices)) bo.mode = SolveMode::heuristic;
    couplings.push_back(*box_distance(A, B, lambda, bo).coupling);
  }
  {
    auto ro = iota_order(A.size()), co = iota_order(B.size());
    couplings.emplace_back(northwest_corner(A.weights(), B.weights(), ro, co));
  }
  if (A.support().size() * B.support().size() <= kMaxCliqueVertices) couplings.push_back(product_coupling(A, B));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pi : couplings)
    best = std::min(best, hli_lambda(pullback_pair(A, B, pi), lambda, HliMode::sampled, opt.hli).value);
  return {best + gap, BoundTag::heuristic};
}

}  // namespace mmspace
