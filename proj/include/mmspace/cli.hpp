#pragma once

// Command dispatch for the mmspace tool. run() never throws: errors become
// exit codes (1 parse/validation, 2 size limit, 3 invariant failure) with a
// message, and successful runs produce a report with sorted keys.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
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
#include "mmspace/suite.hpp"

namespace mmspace {

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  double lambda = 1.0;
  std::string mode;  // empty: the command's default
  std::uint64_t seed = 0;
  std::size_t max_cells = 64;
  std::size_t max_r = 0;  // 0: command default
  std::optional<std::size_t> samples;
  double tol = kResultTol;
  std::string out;
  // command specific
  std::vector<double> f, g;
  std::vector<std::size_t> sizes{10, 100, 1000};
  std::size_t repeats = 1;
  std::vector<std::string> properties;
  std::string inject;
};

struct RunOutcome {
  int status = 0;
  std::string report;  // JSON or CSV, newline terminated
  std::string error;
};

enum ExitCode { kExitOk = 0, kExitInput = 1, kExitSizeLimit = 2, kExitInvariant = 3 };

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct Loaded {
  FiniteMMSpace space;
  nlohmann::json digest;
};

inline Loaded load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return {parse_space(text), {{"path", path}, {"fnv1a", hex64(fnv1a(text))}}};
}

inline nlohmann::json rows(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : m.to_rows()) out.push_back(r);
  return out;
}

inline void need_inputs(const RunConfig& c, std::size_t n) {
  if (c.inputs.size() != n)
    throw ParseError(c.command + " expects " + std::to_string(n) + " input file(s), got " +
                     std::to_string(c.inputs.size()));
}

inline SolveMode box_mode(const std::string& mode) {
  if (mode.empty() || mode == "exact") return SolveMode::exact;
  if (mode == "heuristic") return SolveMode::heuristic;
  throw ParseError("unknown mode '" + mode + "' (expected exact or heuristic)");
}

inline HliMode hli_mode(const std::string& mode, double lambda) {
  if (mode.empty()) return lambda == 0.0 ? HliMode::exact0 : HliMode::sampled;
  if (mode == "exact0") return HliMode::exact0;
  if (mode == "sampled") return HliMode::sampled;
  throw ParseError("unknown mode '" + mode + "' (expected exact0 or sampled)");
}

/// Certificate checks on a space-level box result; failures are bugs.
inline void check_box(const FiniteMMSpace& X, const FiniteMMSpace& Y, const BoxResult& r, double lambda, double tol) {
  const Coupling& pi = *r.coupling;
  const double mx = X.total_mass(), my = Y.total_mass();
  const FiniteMMSpace A = mx <= my ? X : scale_measure(X, my / mx);
  const FiniteMMSpace B = mx <= my ? (same_mass(mx, my) ? Y : scale_measure(Y, mx / my)) : Y;
  if (pi.marginal_error(A.weights(), B.weights()) > tol) throw InvariantError("certificate coupling marginals");
  const double eps = r.value - r.mass_gap;
  double kept = 0.0;
  for (const Cell& c : r.cells) kept += pi(c.x, c.y);
  if (kept < A.total_mass() - lambda * eps - tol) throw InvariantError("certificate retains too little mass");
  for (const Cell& a : r.cells)
    for (const Cell& b : r.cells)
      if (std::abs(A.d(a.x, b.x) - B.d(a.y, b.y)) > eps + tol)
        throw InvariantError("certificate cells disagree by more than the value");
}

inline nlohmann::json run_command(const RunConfig& c, nlohmann::json& inputs, std::string& csv) {
  auto load_all = [&] {
    std::vector<FiniteMMSpace> spaces;
    for (const auto& p : c.inputs) {
      auto l = load(p);
      inputs.push_back(l.digest);
      spaces.push_back(std::move(l.space));
    }
    return spaces;
  };
  if (c.lambda < 0.0 || std::isnan(c.lambda)) throw DomainError("--lambda must be nonnegative");
  const std::string& cmd = c.command;
  nlohmann::json r;

  if (cmd == "validate") {
    need_inputs(c, 1);
    std::ifstream in(c.inputs[0], std::ios::binary);
    if (!in) throw ParseError("cannot open " + c.inputs[0]);
    std::ostringstream buf;
    buf << in.rdbuf();
    inputs.push_back({{"path", c.inputs[0]}, {"fnv1a", hex64(fnv1a(buf.str()))}});
    // parse without the validity requirement so every violation is listed
    try {
      parse_space(buf.str());
      r["valid"] = true;
      r["violations"] = nlohmann::json::array();
    } catch (const ValidationError& e) {
      r["valid"] = false;
      r["violations"] = nlohmann::json::array({e.what()});
    }
    return r;
  }

  if (cmd == "box") {
    need_inputs(c, 2);
    const auto s = load_all();
    BoxOptions opt;
    opt.mode = box_mode(c.mode);
    opt.seed = c.seed;
    opt.max_cells = c.max_cells;
    const auto b = box_distance(s[0], s[1], c.lambda, opt);
    check_box(s[0], s[1], b, c.lambda, c.tol);
    nlohmann::json cells = nlohmann::json::array();
    for (const Cell& cell : b.cells) cells.push_back({s[0].labels()[cell.x], s[1].labels()[cell.y]});
    r["value"] = b.value;
    r["mode"] = to_string(b.mode);
    r["certificate"] = {{"cells", cells},
                        {"retained_mass", b.retained_mass},
                        {"mass_gap", b.mass_gap},
                        {"coupling", rows(b.coupling->matrix())}};
    return r;
  }

  if (cmd == "me") {
    need_inputs(c, 1);
    const auto s = load_all();
    std::vector<double> g = c.g.empty() ? std::vector<double>(c.f.size(), 0.0) : c.g;
    if (c.f.size() != s[0].size() || g.size() != s[0].size())
      throw ParseError("--f and --g need one value per point");
    const double v = me_lambda(c.f, g, s[0].weights(), c.lambda);
    double exceed = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(c.f[i] - g[i]) > v) exceed += s[0].weight(i);
    r["value"] = v;
    r["mode"] = "exact";
    r["certificate"] = {{"mass_above_value", exceed}};
    return r;
  }

  if (cmd == "hlip") {
    need_inputs(c, 2);
    const auto s = load_all();
    ObservableOptions opt;
    opt.hli.seed = c.seed;
    if (c.samples) opt.hli.samples = *c.samples;
    opt.box.max_cells = c.max_cells;
    const HliMode mode = hli_mode(c.mode, c.lambda);
    const auto v = observable_distance(s[0], s[1], c.lambda, mode, opt);
    r["value"] = v.value;
    r["mode"] = to_string(mode);
    r["certificate"] = {{"bound", to_string(v.tag)}};
    return r;
  }

  if (cmd == "matdist") {
    need_inputs(c, 1);
    const auto s = load_all();
    const std::size_t rr = c.max_r == 0 ? 2 : c.max_r;
    const bool sampled = c.samples && *c.samples > 0;
    const auto mu = sampled ? sample_mu_r(s[0], rr, *c.samples, c.seed) : exact_mu_r(s[0], rr);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [key, mass] : mu.masses) entries.push_back({{"matrix", rows(mu.matrix(key))}, {"mass", mass}});
    r["r"] = rr;
    r["mode"] = sampled ? "sampled" : "exact";
    r["total"] = mu.total();
    r["entries"] = entries;
    return r;
  }

  if (cmd == "isotest") {
    need_inputs(c, 2);
    const auto s = load_all();
    const auto v = reconstruction_check(s[0], s[1], c.max_r);
    r["verdict"] = v.verdict();
    r["distinguishing_r"] = v.distinguished ? nlohmann::json(v.distinguishing_r) : nlohmann::json(nullptr);
    if (v.bijection) {
      nlohmann::json b = nlohmann::json::array();
      for (std::size_t x = 0; x < v.bijection->size(); ++x)
        if ((*v.bijection)[x] != kNoPoint) b.push_back({s[0].labels()[x], s[1].labels()[(*v.bijection)[x]]});
      r["bijection"] = b;
    } else {
      r["bijection"] = nullptr;
    }
    r["max_r"] = v.max_r;
    r["consistent"] = v.consistent;
    return r;
  }

  if (cmd == "prokhorov") {
    need_inputs(c, 2);
    const auto s = load_all();
    if (s[0].size() != s[1].size()) throw DomainError("prokhorov needs two weightings of the same points");
    for (std::size_t i = 0; i < s[0].size(); ++i)
      for (std::size_t j = 0; j < s[0].size(); ++j)
        if (std::abs(s[0].d(i, j) - s[1].d(i, j)) > c.tol)
          throw DomainError("prokhorov needs two weightings of the same metric");
    const auto p = prokhorov_coupling(s[0].dist(), s[0].weights(), s[1].weights());
    r["value"] = p.value;
    r["mode"] = "exact";
    r["certificate"] = {{"coupling", rows(p.coupling)}};
    return r;
  }

  if (cmd == "witness") {
    need_inputs(c, 2);
    const auto s = load_all();
    WitnessOptions opt;
    opt.seed = c.seed;
    if (c.mode == "exact")
      opt.mode = WitnessMode::exact;
    else if (c.mode == "heuristic")
      opt.mode = WitnessMode::anneal;
    else if (!c.mode.empty())
      throw ParseError("unknown mode '" + c.mode + "' (expected exact or heuristic)");
    const auto w = witness_search(s[0], s[1], opt);
    if (!witness_holds(s[0], s[1], w.witness, c.tol)) throw InvariantError("witness conditions fail");
    nlohmann::json map = nlohmann::json::array(), subset = nlohmann::json::array();
    for (std::size_t a = 0; a < s[0].size(); ++a) map.push_back({s[0].labels()[a], s[1].labels()[w.witness.map[a]]});
    for (std::size_t a : w.witness.subset) subset.push_back(s[0].labels()[a]);
    r["value"] = w.witness.eps;
    r["mode"] = w.exact ? "exact" : "heuristic";
    r["certificate"] = {
        {"map", map}, {"subset", subset}, {"box_upper", box_upper_from_witness(s[0], s[1], w.witness, c.max_cells)}};
    return r;
  }

  if (cmd == "converge-report") {
    need_inputs(c, 1);
    const auto s = load_all();
    csv = empirical_convergence_experiment(s[0], c.sizes, c.seed, c.repeats, c.max_cells).csv();
    return r;
  }

  if (cmd == "dominate") {
    need_inputs(c, 2);
    const auto s = load_all();
    const auto cert = domination_search(s[0], s[1]);
    r["dominates"] = cert.has_value();
    if (cert) {
      if (!verify_domination(s[0], s[1], *cert)) throw InvariantError("domination certificate fails verification");
      nlohmann::json map = nlohmann::json::array();
      for (std::size_t x = 0; x < cert->map.size(); ++x)
        if (cert->map[x] != kNoPoint) map.push_back({s[0].labels()[x], s[1].labels()[cert->map[x]]});
      r["certificate"] = {{"c", cert->c}, {"map", map}};
    } else {
      r["certificate"] = nullptr;
    }
    return r;
  }

  if (cmd == "homogeneous") {
    need_inputs(c, 1);
    const auto s = load_all();
    const auto group = isometry_group(s[0]);
    nlohmann::json g = nlohmann::json::array();
    for (const auto& h : group) {
      nlohmann::json img = nlohmann::json::array();
      for (std::size_t x : s[0].support()) img.push_back(s[0].labels()[h[x]]);
      g.push_back(img);
    }
    r["homogeneous"] = is_homogeneous(s[0]);
    r["group_size"] = group.size();
    r["group"] = g;
    return r;
  }

  if (cmd == "suite") {
    need_inputs(c, 0);
    SuiteOptions opt;
    opt.seed = c.seed;
    opt.properties = c.properties;
    opt.inject = c.inject;
    opt.tol = c.tol;
    if (c.samples) opt.instances = *c.samples;
    const auto rep = run_suite(opt);
    r = rep.to_json();
    return r;
  }

  throw ParseError("unknown command '" + cmd + "'");
}

}  // namespace detail

inline nlohmann::json config_echo(const RunConfig& c) {
  nlohmann::json j = {{"lambda", c.lambda}, {"mode", c.mode},   {"seed", c.seed},
                      {"max_cells", c.max_cells}, {"max_r", c.max_r}, {"tol", c.tol}};
  j["samples"] = c.samples ? nlohmann::json(*c.samples) : nlohmann::json(nullptr);
  if (c.command == "me") {
    j["f"] = c.f;
    j["g"] = c.g;
  }
  if (c.command == "converge-report") {
    j["sizes"] = c.sizes;
    j["repeats"] = c.repeats;
  }
  if (c.command == "suite") {
    j["properties"] = c.properties;
    j["inject"] = c.inject;
  }
  return j;
}

inline RunOutcome run(const RunConfig& config) {
  RunOutcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    nlohmann::json inputs = nlohmann::json::array();
    std::string csv;
    nlohmann::json report = detail::run_command(config, inputs, csv);
    if (config.command == "converge-report") {
      out.report = csv;
      return out;
    }
    report["command"] = config.command;
    report["config"] = config_echo(config);
    report["inputs"] = inputs;
    report["wall_time_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.report = report.dump(2) + "\n";
    if (config.command == "validate" && !report["valid"].get<bool>()) {
      out.status = kExitInput;
      out.error = "invalid mm-space: " + report["violations"][0].get<std::string>();
    } else if (config.command == "suite" && !report["passed"].get<bool>()) {
      bool only_validation = true;
      for (const auto& p : report["properties"])
        if (!p["pass"].get<bool>() && p["name"] != "validate-inputs") only_validation = false;
      out.status = only_validation ? kExitInput : kExitInvariant;
      out.error = "property suite failed";
    }
  } catch (const ParseError& e) {
    out = {kExitInput, "", e.what()};
  } catch (const ValidationError& e) {
    out = {kExitInput, "", e.what()};
  } catch (const DomainError& e) {
    out = {kExitInput, "", e.what()};
  } catch (const SizeLimitError& e) {
    out = {kExitSizeLimit, "", e.what()};
  } catch (const InvariantError& e) {
    out = {kExitInvariant, "", e.what()};
  } catch (const std::exception& e) {
    out = {kExitInvariant, "", std::string("internal error: ") + e.what()};
  }
  return out;
}

/// Report text without the timing field, for determinism comparisons.
inline std::string strip_timing(const std::string& report) {
  auto j = nlohmann::json::parse(report, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return report;
  j.erase("wall_time_ms");
  return j.dump(2);
}

}  // namespace mmspace
