#pragma once

// Clique search over small compatibility graphs (at most 64 vertices,
// adjacency as 64-bit masks). Used for the retained sets of the box
// distance, the Lipschitz-up-to checks and the witness search.

#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace mmspace {

using VertexSet = std::uint64_t;
inline constexpr std::size_t kMaxCliqueVertices = 64;

inline VertexSet bit(std::size_t v) { return VertexSet{1} << v; }
inline bool contains(VertexSet s, std::size_t v) { return (s >> v) & 1U; }

inline std::vector<std::size_t> members(VertexSet s) {
  std::vector<std::size_t> out;
  while (s) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(s)));
    s &= s - 1;
  }
  return out;
}

/// True if the sorted member list of a is lexicographically smaller than b's.
inline bool lex_less(VertexSet a, VertexSet b) {
  while (a && b) {
    const int x = std::countr_zero(a), y = std::countr_zero(b);
    if (x != y) return x < y;
    a &= a - 1;
    b &= b - 1;
  }
  return !a && b;
}

struct CliqueChoice {
  double score = -std::numeric_limits<double>::infinity();
  VertexSet members = 0;
};

/// Best maximal clique of the graph restricted to `universe` under a score
/// that is monotone under inclusion. `bound(S)` must be an upper bound for
/// the score of every subset of S. Ties (within tol) go to the
/// lexicographically smallest member set. Bron-Kerbosch with pivoting.
inline CliqueChoice best_maximal_clique(const std::vector<VertexSet>& adj, VertexSet universe,
                                        const std::function<double(VertexSet)>& score,
                                        const std::function<double(VertexSet)>& bound, double tol = 1e-12) {
  CliqueChoice best;
  std::function<void(VertexSet, VertexSet, VertexSet)> expand = [&](VertexSet R, VertexSet P, VertexSet X) {
    constexpr double kNone = -std::numeric_limits<double>::infinity();
    if (best.score > kNone && bound(R | P) < best.score - tol) return;
    if (P == 0) {
      if (X != 0) return;
      const double s = score(R);
      if (best.score == kNone || s > best.score + tol || (s >= best.score - tol && lex_less(R, best.members))) {
        best.score = s;
        best.members = R;
      }
      return;
    }
    // pivot maximizing |P & N(u)|
    VertexSet PX = P | X;
    std::size_t pivot = static_cast<std::size_t>(std::countr_zero(PX));
    int most = -1;
    for (VertexSet t = PX; t; t &= t - 1) {
      const auto u = static_cast<std::size_t>(std::countr_zero(t));
      const int c = std::popcount(P & adj[u]);
      if (c > most) {
        most = c;
        pivot = u;
      }
    }
    for (VertexSet t = P & ~adj[pivot]; t; t &= t - 1) {
      const auto v = static_cast<std::size_t>(std::countr_zero(t));
      expand(R | bit(v), P & adj[v], X & adj[v]);
      P &= ~bit(v);
      X |= bit(v);
    }
  };
  if (universe != 0) expand(0, universe, 0);
  return best;
}

/// Maximum-weight clique (exact, branch and bound).
inline CliqueChoice max_weight_clique(const std::vector<VertexSet>& adj, VertexSet universe,
                                      const std::vector<double>& weights) {
  auto total = [&](VertexSet s) {
    double w = 0.0;
    for (VertexSet t = s; t; t &= t - 1) w += weights[static_cast<std::size_t>(std::countr_zero(t))];
    return w;
  };
  return best_maximal_clique(adj, universe, total, total);
}

/// Greedy peeling: drop the vertex with the largest conflicting weight until
/// the remaining set is a clique. Works on any vertex count.
inline std::vector<std::size_t> greedy_clique(const std::vector<std::vector<bool>>& compatible,
                                              const std::vector<std::size_t>& candidates,
                                              const std::vector<double>& weights) {
  std::vector<std::size_t> keep = candidates;
  for (;;) {
    double worst = 0.0;
    std::size_t worst_at = keep.size();
    for (std::size_t a = 0; a < keep.size(); ++a) {
      double conflict = 0.0;
      for (std::size_t b = 0; b < keep.size(); ++b)
        if (a != b && !compatible[keep[a]][keep[b]]) conflict += weights[keep[b]] + 1e-300;
      if (conflict <= 0.0) continue;
      const double key = conflict / (weights[keep[a]] + 1e-300);
      if (worst_at == keep.size() || key > worst) {
        worst = key;
        worst_at = a;
      }
    }
    if (worst_at == keep.size()) return keep;
    keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(worst_at));
  }
}

}  // namespace mmspace
