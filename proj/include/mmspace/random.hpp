#pragma once

// Seeded random instances for property checks. Weights and distances sit on
// dyadic grids so sums and products stay exact in double precision, and
// distances are made metric by shortest-path closure.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "mmspace/lipschitz.hpp"
#include "mmspace/matrix_distribution.hpp"
#include "mmspace/space.hpp"

namespace mmspace {

struct RandomSpaceOptions {
  std::size_t min_points = 1;
  std::size_t max_points = 3;
  /// Keep the total mass at 1; otherwise masses are free multiples of 1/4.
  bool normalized = false;
  /// Distances are multiples of 1/4 in [1/4, max_steps/4].
  int max_steps = 8;
};

inline Matrix random_metric(std::size_t n, int max_steps, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> step(1, max_steps);
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d(i, j) = d(j, i) = 0.25 * step(rng);
  return shortest_path_closure(d);
}

inline FiniteMMSpace random_space(std::mt19937_64& rng, const RandomSpaceOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> size(opt.min_points, opt.max_points);
  const std::size_t n = size(rng);
  std::uniform_int_distribution<int> quarter(1, 4);
  std::vector<double> w(n);
  for (double& x : w) x = 0.25 * quarter(rng);
  if (opt.normalized) {
    double t = 0.0;
    for (double x : w) t += x;
    for (double& x : w) x /= t;
  }
  return FiniteMMSpace(default_labels(n), std::move(w), random_metric(n, opt.max_steps, rng));
}

/// Copy of X with points reordered: point i of X becomes point perm[i].
inline FiniteMMSpace permute_space(const FiniteMMSpace& X, const std::vector<std::size_t>& perm) {
  const std::size_t n = X.size();
  std::vector<std::string> labels(n);
  std::vector<double> w(n);
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[perm[i]] = X.labels()[i];
    w[perm[i]] = X.weight(i);
    for (std::size_t j = 0; j < n; ++j) d(perm[i], perm[j]) = X.d(i, j);
  }
  return FiniteMMSpace(std::move(labels), std::move(w), std::move(d));
}

inline FiniteMMSpace random_relabel(const FiniteMMSpace& X, std::mt19937_64& rng) {
  auto perm = iota_order(X.size());
  std::shuffle(perm.begin(), perm.end(), rng);
  return permute_space(X, perm);
}

/// A random coupling of two equal-mass spaces: a convex combination of two
/// north-west corner vertices with random visiting orders.
inline Coupling random_coupling(const FiniteMMSpace& X, const FiniteMMSpace& Y, std::mt19937_64& rng) {
  auto vertex = [&] {
    auto ro = iota_order(X.size()), co = iota_order(Y.size());
    std::shuffle(ro.begin(), ro.end(), rng);
    std::shuffle(co.begin(), co.end(), rng);
    return northwest_corner(X.weights(), Y.weights(), ro, co);
  };
  const Matrix a = vertex(), b = vertex();
  std::uniform_int_distribution<int> quarter(0, 4);
  const double t = 0.25 * quarter(rng);
  Matrix pi(X.size(), Y.size());
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < Y.size(); ++j) pi(i, j) = t * a(i, j) + (1.0 - t) * b(i, j);
  return Coupling(std::move(pi));
}

/// Splits every atom of X into one to three cells at the same point.
inline CellDecomposition random_cell_split(const FiniteMMSpace& X, std::mt19937_64& rng) {
  CellDecomposition cells;
  std::uniform_int_distribution<int> parts(1, 3), share(1, 3);
  for (std::size_t x : X.support()) {
    const int k = parts(rng);
    std::vector<double> s(static_cast<std::size_t>(k));
    double t = 0.0;
    for (double& v : s) t += (v = share(rng));
    for (double v : s) {
      cells.point_of.push_back(x);
      cells.masses.push_back(X.weight(x) * v / t);
    }
  }
  return cells;
}

}  // namespace mmspace
