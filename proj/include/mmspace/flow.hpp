#pragma once

// Maximum transportation flow on a bipartite graph with capacitated sources
// and sinks and uncapacitated admissible arcs. Instances here are tiny
// (a few dozen nodes), so plain Edmonds-Karp on a dense residual is enough.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "mmspace/space.hpp"

namespace mmspace {

struct TransportFlow {
  double value = 0.0;
  Matrix flow;  // supply x demand
};

/// Max flow from `supply` to `demand` using only arcs with allowed(i, j).
/// `allowed` is row-major supply.size() x demand.size().
inline TransportFlow max_transport(std::span<const double> supply, std::span<const double> demand,
                                   std::span<const std::uint8_t> allowed) {
  const std::size_t ns = supply.size(), nd = demand.size();
  // nodes: 0 = source, 1..ns = rows, ns+1..ns+nd = cols, ns+nd+1 = sink
  const std::size_t n = ns + nd + 2, src = 0, snk = n - 1;
  std::vector<double> cap(n * n, 0.0);
  auto C = [&](std::size_t a, std::size_t b) -> double& { return cap[a * n + b]; };
  const double inf = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    C(src, 1 + i) = std::max(0.0, supply[i]);
    scale = std::max(scale, supply[i]);
  }
  for (std::size_t j = 0; j < nd; ++j) {
    C(1 + ns + j, snk) = std::max(0.0, demand[j]);
    scale = std::max(scale, demand[j]);
  }
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nd; ++j)
      if (allowed[i * nd + j]) C(1 + i, 1 + ns + j) = inf;

  const double eps = 1e-15 * std::max(1.0, scale);
  TransportFlow out;
  out.flow = Matrix(ns, nd);
  std::vector<std::size_t> parent(n);
  for (;;) {
    std::fill(parent.begin(), parent.end(), n);
    parent[src] = src;
    std::deque<std::size_t> q{src};
    while (!q.empty() && parent[snk] == n) {
      const std::size_t a = q.front();
      q.pop_front();
      for (std::size_t b = 0; b < n; ++b)
        if (parent[b] == n && C(a, b) > eps) {
          parent[b] = a;
          q.push_back(b);
        }
    }
    if (parent[snk] == n) break;
    double push = inf;
    for (std::size_t b = snk; b != src; b = parent[b]) push = std::min(push, C(parent[b], b));
    for (std::size_t b = snk; b != src; b = parent[b]) {
      const std::size_t a = parent[b];
      if (C(a, b) != inf) C(a, b) -= push;
      if (C(b, a) != inf) C(b, a) += push;
    }
    out.value += push;
  }
  // Net flow on row->col arcs equals the residual capacity of the reverse arc.
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nd; ++j)
      if (allowed[i * nd + j]) out.flow(i, j) = C(1 + ns + j, 1 + i);
  return out;
}

}  // namespace mmspace
