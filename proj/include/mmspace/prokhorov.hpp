#pragma once

// Prokhorov distance between two weightings of one finite metric space.
//
// mu(A) <= nu(A^eps) + eps for every A holds iff the bipartite transport
// using only arcs with d(i, j) <= eps carries at least m - eps (Strassen,
// finite form), so the distance is a lambda = 1 threshold scan over the
// pairwise distances.

#include <span>
#include <vector>

#include "mmspace/flow.hpp"
#include "mmspace/space.hpp"
#include "mmspace/threshold.hpp"

namespace mmspace {

struct ProkhorovResult {
  double value = 0.0;
  /// A coupling of mu and nu moving all but at most `value` mass a
  /// distance <= value.
  Matrix coupling;
};

inline ProkhorovResult prokhorov_coupling(const Matrix& dist, std::span<const double> mu, std::span<const double> nu) {
  const std::size_t n = mu.size();
  if (nu.size() != n || dist.rows() != n || dist.cols() != n) throw DomainError("prokhorov: size mismatch");
  double mt = 0.0, nt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mu[i] < 0.0 || nu[i] < 0.0) throw DomainError("prokhorov: negative mass");
    mt += mu[i];
    nt += nu[i];
  }
  if (!same_mass(mt, nt)) throw DomainError("prokhorov: measures have unequal totals");

  std::vector<double> values;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (mu[i] > 0.0 && nu[j] > 0.0) values.push_back(dist(i, j));
  const auto thresholds = threshold_candidates(std::move(values));

  std::vector<std::uint8_t> allowed(n * n);
  auto flow_at = [&](std::size_t k) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) allowed[i * n + j] = dist(i, j) <= thresholds[k] ? 1 : 0;
    return max_transport(mu, nu, allowed);
  };
  const auto pick = scan_thresholds(thresholds, mt, 1.0, [&](std::size_t k) { return flow_at(k).value; });
  ProkhorovResult out;
  out.value = pick.value;
  out.coupling = complete_coupling(flow_at(pick.index).flow, mu, nu);
  return out;
}

/// Prokhorov distance between two weightings of `space`.
inline double prokhorov(const FiniteMMSpace& space, std::span<const double> mu, std::span<const double> nu) {
  return prokhorov_coupling(space.dist(), mu, nu).value;
}

}  // namespace mmspace
