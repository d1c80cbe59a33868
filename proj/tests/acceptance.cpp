// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "mmspace/mmspace.hpp"
#include "oracles.hpp"

using namespace mmspace;

namespace {

constexpr double kTol = 1e-9;

struct Tally {
  std::size_t checks = 0;
  std::string first_failure;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && first_failure.empty()) first_failure = what;
  }
  void le(double a, double b, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": " << a << " > " << b;
    expect(a <= b + kTol, s.str());
  }
  void near(double a, double b, const std::string& what, double tol = kTol) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": " << a << " != " << b;
    expect(std::abs(a - b) <= tol, s.str());
  }
};

int failures = 0;

void report(int n, const Tally& t, const std::string& extra = "") {
  const bool ok = t.first_failure.empty();
  if (!ok) ++failures;
  std::printf("criterion %d: %s (%zu checks%s%s)%s%s\n", n, ok ? "PASS" : "FAIL", t.checks, extra.empty() ? "" : ", ",
              extra.c_str(), ok ? "" : ": ", t.first_failure.c_str());
  std::fflush(stdout);
}

template <class F>
void guarded(int n, F&& body) {
  Tally t;
  std::string extra;
  try {
    body(t, extra);
  } catch (const std::exception& e) {
    t.expect(false, std::string("exception: ") + e.what());
  }
  report(n, t, extra);
}

const FiniteMMSpace kD1 = make_space({0.5, 0.5}, {{0, 1}, {1, 0}});
const FiniteMMSpace kD2 = make_space({0.5, 0.5}, {{0, 2}, {2, 0}});

RandomSpaceOptions up_to(std::size_t n, bool normalized = false) { return {1, n, normalized, 8}; }

std::string fixed(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

int main() {
  // metric axioms on mixed-mass triples
  guarded(1, [](Tally& t, std::string& extra) {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1001);
    for (int k = 0; k < 200; ++k) {
      const auto X = random_space(rng, up_to(3)), Y = random_space(rng, up_to(3)), Z = random_space(rng, up_to(3));
      for (double lambda : {0.0, 1.0}) {
        const double xy = box_distance(X, Y, lambda).value, yx = box_distance(Y, X, lambda).value;
        const double yz = box_distance(Y, Z, lambda).value, xz = box_distance(X, Z, lambda).value;
        t.near(xy, yx, "symmetry");
        t.le(xz, xy + yz, "triangle");
        t.near(box_distance(X, random_relabel(X, rng), lambda).value, 0.0, "identity on a relabeled copy");
        t.expect((xy <= kTol) == isomorphism_search(X, Y).has_value(), "zero distance iff isomorphic");
        if (k < 50) t.near(xy, oracle::box_distance(X, Y, lambda), "solver vs subset oracle");
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    t.expect(secs < 60.0, "runtime over 60 s");
    extra = "runtime " + fixed(secs) + " s";
  });

  // two-point goldens: oracle first, then the solver
  guarded(2, [](Tally& t, std::string&) {
    const double o0 = oracle::two_point_family_box(1.0, 2.0, 0.0), o1 = oracle::two_point_family_box(1.0, 2.0, 1.0);
    t.near(o0, 1.0, "oracle box0", 1e-12);
    t.near(o1, 0.5, "oracle box1", 1e-12);
    t.near(oracle::box_distance(kD1, kD2, 0.0), 1.0, "cell-subset oracle box0", 1e-12);
    t.near(oracle::box_distance(kD1, kD2, 1.0), 0.5, "cell-subset oracle box1", 1e-12);
    t.expect(box_distance(kD1, kD2, 0.0).value == o0, "solver box0 differs from the oracle");
    t.expect(box_distance(kD1, kD2, 1.0).value == o1, "solver box1 differs from the oracle");
  });

  // scaling sandwich and lambda monotonicity
  guarded(3, [](Tally& t, std::string&) {
    std::mt19937_64 rng(1003);
    for (int k = 0; k < 200; ++k) {
      const auto X = random_space(rng, up_to(3)), Y = random_space(rng, up_to(3));
      const double lambda = 0.5 * static_cast<double>(k % 5);
      const double base = box_distance(X, Y, lambda).value;
      for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
        const double s = box_distance(scale_measure(X, alpha), scale_measure(Y, alpha), lambda).value;
        t.le(alpha * base, s, "sandwich lower side");
        t.le(s, base, "sandwich upper side");
      }
      double prev = box_distance(X, Y, 0.0).value;
      for (double l : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double v = box_distance(X, Y, l).value;
        t.le(v, prev, "monotone in lambda");
        prev = v;
      }
    }
  });

  // H <= box at lambda 0 on pullbacks, and the H0 / box0 sandwich
  guarded(4, [](Tally& t, std::string&) {
    std::mt19937_64 rng(1004);
    int done = 0;
    while (done < 100) {
      const auto X = random_space(rng, up_to(3, true)), Y = random_space(rng, up_to(3, true));
      const auto pair = pullback_pair(X, Y, random_coupling(X, Y, rng));
      if (pair.size() > 4) continue;
      ++done;
      const double h = hli_lambda(pair, 0.0, HliMode::exact0).value;
      const double b = box_pair(pair, 0.0).value;
      t.near(h, oracle::hausdorff0(pair.d1, pair.d2), "exact H0 vs vertex oracle");
      t.near(b, oracle::box_pair(pair.weights, pair.d1, pair.d2, 0.0), "exact box0 vs subset oracle");
      t.le(h, b, "H0 above box0");
    }
    std::vector<std::pair<FiniteMMSpace, FiniteMMSpace>> pairs{{kD1, kD2}};
    while (pairs.size() < 100) pairs.emplace_back(random_space(rng, up_to(3)), random_space(rng, up_to(3)));
    for (const auto& [X, Y] : pairs) {
      const double h = observable_distance(X, Y, 0.0, HliMode::exact0).value;
      const double b = box_distance(X, Y, 0.0).value;
      t.near(b, oracle::box_distance(X, Y, 0.0), "box0 vs subset oracle");
      t.le(h, b, "H0 above box0");
      t.le(b, 2.0 * h, "box0 above 2 H0");
    }
    t.near(observable_distance(kD1, kD2, 0.0, HliMode::exact0).value, 0.5, "tight pair H0", 1e-12);
    t.near(oracle::hausdorff0(kD1.dist(), kD2.dist()), 0.5, "tight pair H0 oracle", 1e-12);
    t.near(box_distance(kD1, kD2, 0.0).value, 1.0, "tight pair box0", 1e-12);
  });

  // parameter invariance and reconstruction vs isomorphism search
  guarded(5, [](Tally& t, std::string& extra) {
    std::mt19937_64 rng(1005);
    for (int k = 0; k < 100; ++k) {
      const auto X = random_space(rng, up_to(3));
      t.expect(parameter_invariance_check(X, random_cell_split(X, rng), 3), "cell split changed mu_r");
    }
    int distinguished = 0;
    for (int k = 0; k < 200; ++k) {
      const auto X = random_space(rng, up_to(4));
      const auto Y = k % 2 ? random_relabel(X, rng) : random_space(rng, up_to(4));
      const auto v = reconstruction_check(X, Y);
      t.expect(v.consistent, "reconstruction disagrees with isomorphism search (instance " + std::to_string(k) + ")");
      distinguished += v.distinguished;
    }
    extra = std::to_string(distinguished) + "/200 distinguished";
  });

  // empirical convergence trend
  guarded(6, [](Tally& t, std::string& extra) {
    const std::vector<FiniteMMSpace> spaces{
        kD1,
        make_space({0.25, 0.25, 0.5}, {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}),
        make_space({0.25, 0.25, 0.25, 0.25}, {{0, 1, 2, 1}, {1, 0, 1, 2}, {2, 1, 0, 1}, {1, 2, 1, 0}}),
    };
    for (std::size_t i = 0; i < spaces.size(); ++i) {
      const auto rep = empirical_convergence_experiment(spaces[i], {10, 100, 1000}, 2026, 5);
      for (const auto& row : rep.rows) t.expect(row.mode == SolveMode::exact, "row not solved exactly");
      t.expect(rep.rows.back().value < rep.rows.front().value, "no decrease from N=10 to N=1000");
      if (i == 0) {
        t.le(rep.rows.back().value, 0.1 - kTol, "two-point value at N=1000");
        extra = "two-point N=1000 value " + fixed(rep.rows.back().value);
      }
    }
  });

  // witness bound direction
  guarded(7, [](Tally& t, std::string&) {
    std::mt19937_64 rng(1007);
    for (int k = 0; k < 100; ++k) {
      const auto Xn = random_space(rng, up_to(3)), X = random_space(rng, up_to(3));
      const auto w = witness_search(Xn, X).witness;
      t.expect(witness_holds(Xn, X, w), "witness conditions fail");
      const double exact = box_distance(Xn, X, 1.0).value;
      t.near(exact, oracle::box_distance(Xn, X, 1.0), "box1 vs subset oracle");
      t.le(exact, box_upper_from_witness(Xn, X, w), "witness bound below box1");
    }
  });

  // domination transitivity, stability probe, homogeneity probe
  guarded(8, [](Tally& t, std::string&) {
    std::mt19937_64 rng(1008);
    for (int k = 0; k < 50; ++k) {
      const auto X = random_space(rng, up_to(5));
      const auto Y = detail::random_dominated(X, rng);
      const auto Z = detail::random_dominated(Y.Y, rng);
      const auto xy = domination_search(X, Y.Y), yz = domination_search(Y.Y, Z.Y);
      t.expect(xy && yz, "domination search missed a constructed pair");
      if (xy && yz) t.expect(verify_domination(X, Z.Y, compose(*xy, *yz)), "composed certificate invalid");
    }
    for (int k = 0; k < 20; ++k) {
      const auto X = random_space(rng, up_to(4));
      const auto Y = detail::random_dominated(X, rng).Y;
      for (std::size_t n = 1; n <= 16; n *= 2) {
        const double s = 1.0 + 1.0 / (4.0 * static_cast<double>(n) * std::max(1.0, X.dist().sum()));
        const auto Xn = detail::scale_metric(X, s), Yn = detail::scale_metric(Y, s);
        t.expect(domination_search(Xn, Yn).has_value(), "perturbed pair not dominated");
        t.le(box_distance(Xn, X, 1.0).value, 1.0 / static_cast<double>(n), "X_n too far from X");
        t.le(box_distance(Yn, Y, 1.0).value, 1.0 / static_cast<double>(n), "Y_n too far from Y");
      }
      t.expect(domination_search(X, Y).has_value(), "limit pair not dominated");
    }
    for (int k = 0; k < 20; ++k) {
      const std::size_t size = 2 + static_cast<std::size_t>(k % 6);
      const auto X = detail::cycle_space(size, 0.5 + 0.25 * static_cast<double>(k % 3));
      t.expect(is_homogeneous(X), "cycle limit not homogeneous");
      for (std::size_t n = 1; n <= 16; n *= 2) {
        const auto Xn = detail::scale_metric(X, 1.0 + 1.0 / (8.0 * static_cast<double>(n)));
        t.expect(is_homogeneous(Xn), "perturbed cycle not homogeneous");
        if (size * size <= 64)
          t.le(box_distance(Xn, X, 1.0).value, 1.0 / static_cast<double>(n), "perturbation too large");
      }
    }
  });

  // determinism of the suite report
  guarded(9, [](Tally& t, std::string& extra) {
    SuiteOptions opt;
    opt.seed = 7;
    const auto a = run_suite(opt).to_json().dump(2), b = run_suite(opt).to_json().dump(2);
    t.expect(a == b, "suite reports differ");
    RunConfig c;
    c.command = "suite";
    c.seed = 7;
    const auto ra = run(c), rb = run(c);
    t.expect(ra.status == 0, "suite run failed: " + ra.error);
    t.expect(strip_timing(ra.report) == strip_timing(rb.report), "CLI suite reports differ");
    extra = std::to_string(a.size()) + " bytes";
  });

  return failures == 0 ? 0 : 1;
}
