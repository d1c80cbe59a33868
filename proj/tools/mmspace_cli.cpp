#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mmspace/cli.hpp"

int main(int argc, char** argv) {
  mmspace::RunConfig cfg;
  CLI::App app{"Box and observable distances between finite metric-measure spaces"};
  app.require_subcommand(1);

  std::size_t samples = 0;
  app.add_option("--lambda", cfg.lambda, "weight of the dropped mass (default 1)");
  app.add_option("--mode", cfg.mode, "exact|heuristic, or exact0|sampled for hlip");
  app.add_option("--seed", cfg.seed, "seed for randomized modes");
  app.add_option("--max-cells", cfg.max_cells, "largest cell graph the exact solvers accept");
  app.add_option("--max-r", cfg.max_r, "largest r for matrix distributions");
  auto* samples_opt = app.add_option("--samples", samples, "sample count (hlip, matdist, suite instances)");
  app.add_option("--tol", cfg.tol, "tolerance for certificate checks");
  app.add_option("--out", cfg.out, "write the report here instead of stdout");

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"validate", "check an mm-space file"},
      {"box", "box distance between two spaces"},
      {"me", "me_lambda distance between two functions on a space"},
      {"hlip", "observable distance between two spaces"},
      {"matdist", "matrix distribution mu_r of a space"},
      {"isotest", "reconstruction-based isomorphism test"},
      {"prokhorov", "Prokhorov distance between two weightings of one metric"},
      {"witness", "convergence witness from X_n to X"},
      {"converge-report", "box distance to empirical spaces, as CSV"},
      {"dominate", "Lipschitz domination search"},
      {"homogeneous", "isometry group and homogeneity"},
      {"suite", "seeded property battery"},
  };
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->fallthrough();
    sub->add_option("inputs", cfg.inputs, "mm-space files");
    sub->callback([&cfg, name = std::string(s.name)] { cfg.command = name; });
    if (std::string(s.name) == "me") {
      sub->add_option("--f", cfg.f, "values of f, comma separated")->delimiter(',')->required();
      sub->add_option("--g", cfg.g, "values of g (default zero)")->delimiter(',');
    }
    if (std::string(s.name) == "converge-report") {
      sub->add_option("--sizes", cfg.sizes, "sample sizes, comma separated")->delimiter(',');
      sub->add_option("--repeats", cfg.repeats, "independent draws averaged per size");
    }
    if (std::string(s.name) == "suite") {
      sub->add_option("--properties", cfg.properties, "property names or fragments")->delimiter(',');
      sub->add_option("--inject", cfg.inject, "fault to inject (asymmetry)");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mmspace::kExitInput;
  }
  if (samples_opt->count() > 0) cfg.samples = samples;

  const auto outcome = mmspace::run(cfg);
  if (!outcome.report.empty()) {
    if (cfg.out.empty()) {
      std::cout << outcome.report;
    } else {
      std::ofstream out(cfg.out, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot write " << cfg.out << "\n";
        return mmspace::kExitInput;
      }
      out << outcome.report;
    }
  }
  if (!outcome.error.empty()) std::cerr << "error: " << outcome.error << "\n";
  return outcome.status;
}
