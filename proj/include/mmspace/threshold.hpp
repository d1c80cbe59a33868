#pragma once

// Candidate-epsilon scans. Every quantity of the form
//
//   inf { eps : retained(eps) >= total - lambda * eps }
//
// with retained(.) a nondecreasing step function that only jumps at known
// thresholds is attained at one of the thresholds or at one of the mass
// breakpoints (total - retained)/lambda. This covers the box distance of a
// fixed pair, the exact box distance over couplings, me_lambda-style
// distances to Lip_1 and the Prokhorov distance.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "mmspace/clique.hpp"
#include "mmspace/errors.hpp"
#include "mmspace/space.hpp"

namespace mmspace {

/// Sorted distinct nonnegative values, always starting with 0.
inline std::vector<double> threshold_candidates(std::vector<double> values) {
  values.push_back(0.0);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

struct ThresholdPick {
  double value = 0.0;
  std::size_t index = 0;  // threshold whose retained set certifies the value
};

/// Minimizes max(thresholds[k], deficit_k / lambda) over k. With `monotone`
/// the retained masses must be nondecreasing in k and only O(log K) of them
/// are evaluated; otherwise every threshold is scanned.
template <class MassAt>
ThresholdPick scan_thresholds(const std::vector<double>& thresholds, double total, double lambda, MassAt&& mass_at,
                              bool monotone = true) {
  if (thresholds.empty()) throw DomainError("scan_thresholds: no candidates");
  const double inf = std::numeric_limits<double>::infinity();
  std::map<std::size_t, double> cache;
  auto need = [&](std::size_t k) {
    auto it = cache.find(k);
    const double kept = it != cache.end() ? it->second : (cache[k] = mass_at(k));
    double deficit = total - kept;
    if (deficit <= mass_tol(total)) return 0.0;
    return lambda > 0.0 ? deficit / lambda : inf;
  };

  if (!monotone) {
    ThresholdPick best{inf, 0};
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      const double v = std::max(thresholds[k], need(k));
      if (v < best.value) best = {v, k};
    }
    return best;
  }

  // first k with thresholds[k] >= need(k)
  std::size_t lo = 0, hi = thresholds.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (thresholds[mid] >= need(mid))
      hi = mid;
    else
      lo = mid + 1;
  }
  if (lo == thresholds.size()) {
    const std::size_t last = thresholds.size() - 1;
    return {std::max(thresholds[last], need(last)), last};
  }
  ThresholdPick pick{thresholds[lo], lo};
  if (lo > 0) {
    const double prev = need(lo - 1);
    if (prev < pick.value) pick = {prev, lo - 1};
  }
  return pick;
}

struct ThresholdCliqueResult {
  double value = 0.0;
  std::vector<std::size_t> retained;  // indices into the weight vector
  double retained_mass = 0.0;
  bool exact = true;
};

/// inf { eps : exists S with gap(i, j) <= eps on S x S and
///             mass(S) >= total - lambda * eps }
/// over the positive-weight indices. `gap` is symmetric with zero diagonal.
inline ThresholdCliqueResult threshold_clique(std::span<const double> weights, const Matrix& gap, double lambda,
                                              bool exact, std::size_t max_vertices = kMaxCliqueVertices) {
  if (lambda < 0.0 || std::isnan(lambda)) throw DomainError("lambda must be nonnegative");
  std::vector<std::size_t> supp;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > 0.0) supp.push_back(i);
  double total = 0.0;
  for (std::size_t i : supp) total += weights[i];

  ThresholdCliqueResult out;
  out.exact = exact;
  auto mass_of = [&](const std::vector<std::size_t>& s) {
    double m = 0.0;
    for (std::size_t i : s) m += weights[i];
    return m;
  };

  std::vector<double> values;
  double max_gap = 0.0;
  for (std::size_t a = 0; a < supp.size(); ++a)
    for (std::size_t b = a + 1; b < supp.size(); ++b) {
      values.push_back(gap(supp[a], supp[b]));
      max_gap = std::max(max_gap, gap(supp[a], supp[b]));
    }
  if (lambda == 0.0 || supp.size() <= 1) {
    out.value = supp.size() <= 1 ? 0.0 : max_gap;
    out.retained = supp;
    out.retained_mass = total;
    out.exact = true;
    return out;
  }
  const auto thresholds = threshold_candidates(std::move(values));

  if (exact) {
    if (supp.size() > std::min(max_vertices, kMaxCliqueVertices))
      throw SizeLimitError("exact clique search limited to " + std::to_string(std::min(max_vertices, kMaxCliqueVertices)) +
                           " points, got " + std::to_string(supp.size()));
    std::vector<double> w(supp.size());
    for (std::size_t a = 0; a < supp.size(); ++a) w[a] = weights[supp[a]];
    const VertexSet universe = supp.size() == 64 ? ~VertexSet{0} : bit(supp.size()) - 1;
    std::map<std::size_t, CliqueChoice> found;
    auto solve = [&](std::size_t k) -> const CliqueChoice& {
      auto it = found.find(k);
      if (it != found.end()) return it->second;
      std::vector<VertexSet> adj(supp.size(), 0);
      for (std::size_t a = 0; a < supp.size(); ++a)
        for (std::size_t b = 0; b < supp.size(); ++b)
          if (a != b && gap(supp[a], supp[b]) <= thresholds[k]) adj[a] |= bit(b);
      return found[k] = max_weight_clique(adj, universe, w);
    };
    const auto pick = scan_thresholds(thresholds, total, lambda, [&](std::size_t k) { return solve(k).score; });
    out.value = pick.value;
    for (std::size_t a : members(solve(pick.index).members)) out.retained.push_back(supp[a]);
  } else {
    std::vector<std::vector<bool>> compat(weights.size(), std::vector<bool>(weights.size(), true));
    std::map<std::size_t, std::vector<std::size_t>> found;
    auto solve = [&](std::size_t k) -> const std::vector<std::size_t>& {
      auto it = found.find(k);
      if (it != found.end()) return it->second;
      for (std::size_t a : supp)
        for (std::size_t b : supp) compat[a][b] = gap(a, b) <= thresholds[k];
      return found[k] = greedy_clique(compat, supp, std::vector<double>(weights.begin(), weights.end()));
    };
    const auto pick =
        scan_thresholds(thresholds, total, lambda, [&](std::size_t k) { return mass_of(solve(k)); }, false);
    out.value = pick.value;
    out.retained = solve(pick.index);
  }
  std::sort(out.retained.begin(), out.retained.end());
  out.retained_mass = mass_of(out.retained);
  return out;
}

}  // namespace mmspace
