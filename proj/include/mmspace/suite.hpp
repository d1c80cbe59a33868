#pragma once

// Seeded property battery over random desk-scale instances. Each property
// gets its own stream derived from the suite seed and its name, so a filter
// does not change the instances of the properties that remain.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmspace/box.hpp"
#include "mmspace/io.hpp"
#include "mmspace/limits.hpp"
#include "mmspace/lipschitz.hpp"
#include "mmspace/matrix_distribution.hpp"
#include "mmspace/prokhorov.hpp"
#include "mmspace/random.hpp"

namespace mmspace {

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct SuiteOptions {
  std::uint64_t seed = 0;
  /// Property names or name fragments; empty runs everything. A trailing
  /// "-only" is ignored, so "triangle-only" selects "triangle".
  std::vector<std::string> properties;
  /// "asymmetry" breaks the symmetry of one generated distance matrix.
  std::string inject;
  std::size_t instances = 100;
  double tol = kResultTol;
};

struct PropertyResult {
  std::string name;
  bool pass = true;
  std::size_t checked = 0;
  std::string detail;
};

struct SuiteReport {
  std::uint64_t seed = 0;
  std::vector<PropertyResult> results;

  bool ok() const {
    return std::all_of(results.begin(), results.end(), [](const PropertyResult& r) { return r.pass; });
  }

  nlohmann::json to_json() const {
    nlohmann::json props = nlohmann::json::array();
    for (const auto& r : results)
      props.push_back({{"name", r.name}, {"pass", r.pass}, {"checked", r.checked}, {"detail", r.detail}});
    return {{"seed", seed}, {"passed", ok()}, {"properties", props}};
  }
};

namespace detail {

class Checker {
 public:
  explicit Checker(double tol) : tol_(tol) {}

  double tol() const { return tol_; }
  std::size_t checked() const { return checked_; }
  const std::string& failure() const { return failure_; }

  /// Records lhs <= rhs + tol.
  void le(double lhs, double rhs, const std::string& what) {
    expect(lhs <= rhs + tol_, what + ": " + format_double(lhs) + " > " + format_double(rhs));
  }
  void near(double lhs, double rhs, const std::string& what) {
    expect(std::abs(lhs - rhs) <= tol_, what + ": " + format_double(lhs) + " != " + format_double(rhs));
  }
  void expect(bool ok, const std::string& what) {
    ++checked_;
    if (!ok && failure_.empty()) failure_ = what + " (check " + std::to_string(checked_) + ")";
  }

 private:
  double tol_;
  std::size_t checked_ = 0;
  std::string failure_;
};

using PropertyFn = std::function<void(Checker&, std::mt19937_64&, const SuiteOptions&)>;

inline RandomSpaceOptions small_spaces(std::size_t max_points, bool normalized = false) {
  RandomSpaceOptions o;
  o.max_points = max_points;
  o.normalized = normalized;
  return o;
}

/// X dominates its image under a random surjection onto k points, with the
/// closure of the set distances and the mass divided by c.
struct DominatedPair {
  FiniteMMSpace Y;
  DominationCertificate cert;
};

inline DominatedPair random_dominated(const FiniteMMSpace& X, std::mt19937_64& rng) {
  const auto s = X.support();
  std::uniform_int_distribution<std::size_t> kpick(1, s.size());
  const std::size_t k = kpick(rng);
  std::vector<std::size_t> q(X.size(), kNoPoint);
  auto order = s;
  std::shuffle(order.begin(), order.end(), rng);
  std::uniform_int_distribution<std::size_t> any(0, k - 1);
  for (std::size_t i = 0; i < order.size(); ++i) q[order[i]] = i < k ? i : any(rng);
  Matrix d(k, k, 0.0);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      if (a != b) d(a, b) = std::numeric_limits<double>::infinity();
  for (std::size_t x : s)
    for (std::size_t y : s)
      if (q[x] != q[y]) d(q[x], q[y]) = std::min(d(q[x], q[y]), X.d(x, y));
  d = shortest_path_closure(d);
  std::uniform_int_distribution<int> cpick(1, 2);
  const double c = cpick(rng);
  std::vector<double> w(k, 0.0);
  for (std::size_t x : s) w[q[x]] += X.weight(x) / c;
  return {FiniteMMSpace(default_labels(k), std::move(w), std::move(d)), {q, c}};
}

inline FiniteMMSpace scale_metric(const FiniteMMSpace& X, double factor) {
  Matrix d = X.dist();
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j) d(i, j) *= factor;
  return FiniteMMSpace(X.labels(), X.weights(), std::move(d));
}

/// Uniform cycle on k points with the path metric, a homogeneous space.
inline FiniteMMSpace cycle_space(std::size_t k, double mass = 1.0) {
  Matrix d(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t a = i > j ? i - j : j - i;
      d(i, j) = static_cast<double>(std::min(a, k - a));
    }
  return FiniteMMSpace(default_labels(k), std::vector<double>(k, mass / static_cast<double>(k)), std::move(d));
}

inline std::vector<std::pair<std::string, PropertyFn>> properties() {
  std::vector<std::pair<std::string, PropertyFn>> p;

  p.emplace_back("validate-inputs", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      RandomSpaceOptions ro = small_spaces(4);
      ro.min_points = 2;
      FiniteMMSpace X = random_space(rng, ro);
      if (o.inject == "asymmetry" && k == 0) {
        Matrix d = X.dist();
        d(0, 1) += 0.5;
        X = FiniteMMSpace(X.labels(), X.weights(), std::move(d));
      }
      const auto report = validate(X);
      c.expect(report.ok(), report.ok() ? "" : "validation failed: " + report.violations.front());
    }
  });

  p.emplace_back("symmetry", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(4)), Y = random_space(rng, small_spaces(4));
      for (double lambda : {0.0, 1.0})
        c.near(box_distance(X, Y, lambda).value, box_distance(Y, X, lambda).value, "box symmetry");
    }
  });

  p.emplace_back("identity", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(4));
      const auto Y = random_relabel(X, rng);
      c.near(box_distance(X, Y, 1.0).value, 0.0, "box of relabeled copy");
      c.expect(isomorphism_search(X, Y).has_value(), "relabeled copy not isomorphic");
    }
  });

  p.emplace_back("triangle", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng), Y = random_space(rng), Z = random_space(rng);
      for (double lambda : {0.0, 1.0}) {
        const double xy = box_distance(X, Y, lambda).value, yz = box_distance(Y, Z, lambda).value;
        c.le(box_distance(X, Z, lambda).value, xy + yz, "box triangle inequality");
      }
    }
  });

  p.emplace_back("lambda-monotone", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng), Y = random_space(rng);
      double prev = box_distance(X, Y, 0.0).value;
      for (double lambda : {0.5, 1.0, 2.0, 4.0}) {
        const double v = box_distance(X, Y, lambda).value;
        c.le(v, prev, "box increases with lambda");
        prev = v;
      }
    }
  });

  p.emplace_back("scaling-sandwich", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng), Y = random_space(rng);
      for (double alpha : {0.25, 0.5, 1.0}) {
        const double base = box_distance(X, Y, 1.0).value;
        const double scaled = box_distance(scale_measure(X, alpha), scale_measure(Y, alpha), 1.0).value;
        c.le(alpha * base, scaled, "scaling sandwich lower side");
        c.le(scaled, base, "scaling sandwich upper side");
      }
    }
  });

  p.emplace_back("heuristic-upper", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(4)), Y = random_space(rng, small_spaces(4));
      BoxOptions h;
      h.mode = SolveMode::heuristic;
      h.seed = o.seed;
      c.le(box_distance(X, Y, 1.0).value, box_distance(X, Y, 1.0, h).value, "heuristic below exact");
    }
  });

  p.emplace_back("coupling-upper", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(4, true)), Y = random_space(rng, small_spaces(4, true));
      const auto pi = random_coupling(X, Y, rng);
      for (double lambda : {0.0, 1.0})
        c.le(box_distance(X, Y, lambda).value, box_pair(pullback_pair(X, Y, pi), lambda).value,
             "coupling value below the infimum");
    }
  });

  p.emplace_back("box-zero-iff-isomorphic", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(4));
      const auto Y = k % 2 ? random_relabel(X, rng) : random_space(rng, small_spaces(4));
      const bool zero = box_distance(X, Y, 1.0).value <= c.tol();
      c.expect(zero == isomorphism_search(X, Y).has_value(), "box zero disagrees with isomorphism search");
    }
  });

  p.emplace_back("me-metric", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    std::uniform_int_distribution<int> val(-8, 8), wt(0, 4);
    for (std::size_t k = 0; k < o.instances; ++k) {
      const std::size_t n = 1 + k % 5;
      std::vector<double> f(n), g(n), h(n), w(n);
      for (std::size_t i = 0; i < n; ++i) {
        f[i] = 0.25 * val(rng);
        g[i] = 0.25 * val(rng);
        h[i] = 0.25 * val(rng);
        w[i] = 0.25 * wt(rng);
      }
      for (double lambda : {0.0, 0.5, 1.0, 3.0}) {
        const double fg = me_lambda(f, g, w, lambda);
        c.near(fg, me_lambda(g, f, w, lambda), "me symmetry");
        c.le(me_lambda(f, h, w, lambda), fg + me_lambda(g, h, w, lambda), "me triangle");
        c.near(me_lambda(f, f, w, lambda), 0.0, "me identity");
        bool equal_on_support = true;
        for (std::size_t i = 0; i < n; ++i)
          if (w[i] > 0.0 && f[i] != g[i]) equal_on_support = false;
        c.expect((fg == 0.0) == equal_on_support, "me zero iff equal on the support");
      }
    }
  });

  p.emplace_back("me-monotone", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    std::uniform_int_distribution<int> val(-8, 8), wt(1, 4);
    for (std::size_t k = 0; k < o.instances; ++k) {
      const std::size_t n = 1 + k % 5;
      std::vector<double> f(n), g(n), w(n);
      for (std::size_t i = 0; i < n; ++i) {
        f[i] = 0.25 * val(rng);
        g[i] = 0.25 * val(rng);
        w[i] = 0.25 * wt(rng);
      }
      double prev = me_lambda(f, g, w, 0.0);
      for (double lambda : {0.25, 0.5, 1.0, 2.0, 8.0}) {
        const double v = me_lambda(f, g, w, lambda);
        c.le(v, prev, "me increases with lambda");
        prev = v;
      }
    }
  });

  p.emplace_back("project-lip1", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    std::uniform_int_distribution<int> val(-12, 12);
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(5));
      const LipschitzSet L(X.dist(), X.weights());
      std::vector<double> f(X.size());
      for (double& v : f) v = 0.25 * val(rng);
      const auto all = iota_order(X.size());
      const auto g = project_to_lip1(f, X.dist(), all);
      c.expect(L.contains(g), "projection is not 1-Lipschitz");
      const auto again = project_to_lip1(g, X.dist(), all);
      double diff = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) diff = std::max(diff, std::abs(again[i] - g[i]));
      c.near(diff, 0.0, "projection of a 1-Lipschitz function moved");
    }
  });

  p.emplace_back("h-le-box", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(3, true)), Y = random_space(rng, small_spaces(3, true));
      const auto pair = pullback_pair(X, Y, random_coupling(X, Y, rng));
      if (pair.size() <= 6)
        c.le(hli_lambda(pair, 0.0, HliMode::exact0).value, box_pair(pair, 0.0).value, "H0 above box0");
      HliOptions ho;
      ho.samples = 32;
      ho.seed = o.seed + k;
      c.le(hli_lambda(pair, 1.0, HliMode::sampled, ho).value, box_pair(pair, 1.0).value, "sampled H1 above box1");
    }
  });

  p.emplace_back("lip1-pullback", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(3, true)), Y = random_space(rng, small_spaces(3, true));
      const auto pair = pullback_pair(X, Y, random_coupling(X, Y, rng));
      const LipschitzSet LX(X.dist(), X.weights());
      for (const auto& v : lip1_vertices(pair.d1, pair.weights)) {
        std::vector<double> on_x(X.size(), 0.0);
        bool constant = true;
        std::vector<std::uint8_t> seen(X.size(), 0);
        for (std::size_t a = 0; a < pair.size(); ++a) {
          const std::size_t x = pair.cells[a].x;
          if (seen[x] && std::abs(on_x[x] - v[a]) > c.tol()) constant = false;
          seen[x] = 1;
          on_x[x] = v[a];
        }
        c.expect(constant, "vertex not constant on the cells over a point");
        const auto lifted = project_to_lip1(on_x, X.dist(), X.support());
        std::vector<double> fixed = lifted;
        for (std::size_t x : X.support()) fixed[x] = on_x[x];
        c.expect(LX.contains(fixed, c.tol()), "vertex is not a pulled-back 1-Lipschitz function");
      }
    }
  });

  p.emplace_back("h-box-sandwich", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng), Y = random_space(rng);
      const double h = observable_distance(X, Y, 0.0, HliMode::exact0).value;
      const double b = box_distance(X, Y, 0.0).value;
      c.le(h, b, "H0 above box0");
      c.le(b, 2.0 * h, "box0 above 2 H0");
    }
  });

  p.emplace_back("mu-r-mass", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(4));
      for (std::size_t r = 1; r <= 3; ++r)
        c.near(exact_mu_r(X, r).total(), std::pow(X.total_mass(), static_cast<double>(r)), "mu_r total mass");
    }
  });

  p.emplace_back("reconstruction", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(4));
      const auto Y = k % 2 ? random_relabel(X, rng) : random_space(rng, small_spaces(4));
      const auto v = reconstruction_check(X, Y);
      c.expect(v.consistent, "matrix distributions and isomorphism search disagree");
    }
  });

  p.emplace_back("parameter-invariance", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(3));
      c.expect(parameter_invariance_check(X, random_cell_split(X, rng), 3), "cell split changed mu_r");
    }
  });

  p.emplace_back("sample-mu-r", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    const std::size_t spaces = std::max<std::size_t>(1, o.instances / 10);
    for (std::size_t k = 0; k < spaces; ++k) {
      const auto X = random_space(rng, small_spaces(3, true));
      const auto exact = exact_mu_r(X, 2);
      double tv = 0.0;
      for (std::uint64_t s = 0; s < 5; ++s) tv += total_variation(sample_mu_r(X, 2, 100000, rng()), exact) / 5.0;
      c.le(tv, 0.02, "empirical mu_2 too far from exact");
    }
  });

  p.emplace_back("prokhorov-metric", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    std::uniform_int_distribution<int> wt(0, 4);
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(4));
      auto weighting = [&] {
        std::vector<double> w(X.size());
        double t = 0.0;
        for (double& v : w) t += (v = 0.25 * wt(rng));
        if (t == 0.0) w[0] = t = 1.0;
        for (double& v : w) v /= t;
        return w;
      };
      const auto a = weighting(), b = weighting(), d = weighting();
      c.near(prokhorov(X, a, a), 0.0, "prokhorov identity");
      c.near(prokhorov(X, a, b), prokhorov(X, b, a), "prokhorov symmetry");
      c.le(prokhorov(X, a, d), prokhorov(X, a, b) + prokhorov(X, b, d), "prokhorov triangle");
    }
  });

  p.emplace_back("witness-bound", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto Xn = random_space(rng, small_spaces(3)), X = random_space(rng, small_spaces(3));
      const auto w = witness_search(Xn, X).witness;
      c.expect(witness_holds(Xn, X, w), "witness conditions fail");
      c.le(box_distance(Xn, X, 1.0).value, box_upper_from_witness(Xn, X, w), "witness bound below box1");
    }
  });

  p.emplace_back("convergence-trend", [](Checker& c, std::mt19937_64& rng, const SuiteOptions&) {
    for (std::size_t n : {2, 3, 4}) {
      RandomSpaceOptions ro;
      ro.min_points = ro.max_points = n;
      ro.normalized = true;
      const auto X = n == 2 ? cycle_space(2) : random_space(rng, ro);
      const auto rep = empirical_convergence_experiment(X, {10, 100, 1000}, rng(), 5);
      c.expect(rep.trend_ok, "empirical box1 did not decrease for " + std::to_string(n) + " points");
      if (n == 2) c.le(rep.rows.back().value, 0.1, "two-point empirical box1 at N=1000");
    }
  });

  p.emplace_back("domination-transitivity", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    for (std::size_t k = 0; k < o.instances; ++k) {
      const auto X = random_space(rng, small_spaces(5));
      const auto Y = random_dominated(X, rng);
      const auto Z = random_dominated(Y.Y, rng);
      c.expect(verify_domination(X, Y.Y, Y.cert), "constructed certificate invalid");
      const auto xy = domination_search(X, Y.Y), yz = domination_search(Y.Y, Z.Y);
      c.expect(xy && yz, "domination search missed a certified pair");
      if (xy && yz) c.expect(verify_domination(X, Z.Y, compose(*xy, *yz)), "composed certificate invalid");
    }
  });

  p.emplace_back("domination-stability", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    const std::size_t families = std::max<std::size_t>(1, o.instances / 5);
    for (std::size_t k = 0; k < families; ++k) {
      const auto X = random_space(rng, small_spaces(4));
      const auto Y = random_dominated(X, rng).Y;
      for (std::size_t n : {1, 2, 4, 8, 16}) {
        const double t = 1.0 / (4.0 * static_cast<double>(n) * std::max(1.0, X.dist().sum()));
        const auto Xn = scale_metric(X, 1.0 + t), Yn = scale_metric(Y, 1.0 + t);
        c.expect(domination_search(Xn, Yn).has_value(), "perturbed pair not dominated");
        c.le(box_distance(Xn, X, 1.0).value, 1.0 / static_cast<double>(n), "perturbation too large");
      }
      c.expect(domination_search(X, Y).has_value(), "limit pair not dominated");
    }
  });

  p.emplace_back("homogeneity-stability", [](Checker& c, std::mt19937_64& rng, const SuiteOptions& o) {
    std::uniform_int_distribution<std::size_t> size(1, 6);
    const std::size_t families = std::max<std::size_t>(1, o.instances / 5);
    for (std::size_t k = 0; k < families; ++k) {
      const auto X = cycle_space(size(rng), 0.5 + 0.25 * static_cast<double>(k % 3));
      for (std::size_t n : {1, 2, 4, 8, 16}) {
        const auto Xn = scale_metric(X, 1.0 + 1.0 / (8.0 * static_cast<double>(n)));
        c.expect(is_homogeneous(Xn), "perturbed homogeneous space is not homogeneous");
        c.le(box_distance(Xn, X, 1.0).value, 1.0 / static_cast<double>(n), "perturbation too large");
      }
      c.expect(is_homogeneous(X), "limit not homogeneous");
    }
  });

  return p;
}

inline bool selected(const std::string& name, const std::vector<std::string>& filter) {
  if (filter.empty()) return true;
  for (std::string f : filter) {
    if (f.size() > 5 && f.compare(f.size() - 5, 5, "-only") == 0) f.resize(f.size() - 5);
    if (!f.empty() && name.find(f) != std::string::npos) return true;
  }
  return false;
}

}  // namespace detail

inline std::vector<std::string> suite_property_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : detail::properties()) out.push_back(name);
  return out;
}

inline SuiteReport run_suite(const SuiteOptions& opt = {}) {
  SuiteReport report;
  report.seed = opt.seed;
  for (const auto& [name, fn] : detail::properties()) {
    if (!detail::selected(name, opt.properties)) continue;
    std::seed_seq seq{opt.seed, fnv1a(name)};
    std::mt19937_64 rng(seq);
    detail::Checker checker(opt.tol);
    PropertyResult r;
    r.name = name;
    try {
      fn(checker, rng, opt);
      r.pass = checker.failure().empty();
      r.detail = checker.failure();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.checked = checker.checked();
    report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace mmspace
