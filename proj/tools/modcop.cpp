// modcop: sampling, density grids, rank correlation, pathology probes and
// the verification suite for copulas with density f(sum u_j mod 1).

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "modcop/verify.hpp"

int main(int argc, char** argv) {
  using modcop::cli::RunConfig;

  CLI::App app{"Copulas generated by univariate densities on [0,1]", "modcop"};
  app.set_config("--config", "", "Read options from a key = value file; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  std::string interval;
  std::optional<std::uint64_t> seed;

  app.add_option("--gen", config.generators,
                 "Generator spec: uniform, piecewise:N, triangular, beta:A,B, pair:Q, "
                 "pathology:N[,evenly|diagonal[,zeta|dyadic|geomR[,SEED]]]; repeat for verify")
      ->allow_extra_args(false)
      ->delimiter('\0');
  app.add_option("--dim", config.dimension, "Dimension d >= 2");
  app.add_option("--signs", config.signs, "Sign bit string, one bit per coordinate (e.g. 010)");
  app.add_option("--n", config.n, "Number of draws");
  app.add_option("--resolution", config.resolution, "Grid points per axis");
  app.add_option("--seed", seed, "Random seed")->envname("MODCOP_SEED");
  app.add_option("--tol", config.tolerance, "Quadrature tolerance")->check(CLI::PositiveNumber);
  app.add_option("--interval", interval, "Probe interval a,b");
  app.add_option("--threshold", config.threshold, "Probe threshold M");
  app.add_option("--check", config.checks, "Run only this verification check (repeatable)")->allow_extra_args(false);
  app.add_option("--inject", config.inject, "Inject a named perturbation into the verification suite");
  app.add_option("--out", config.out, "Output file (default: standard output)");

  app.add_subcommand("sample", "Draw points from the copula and write them as CSV");
  app.add_subcommand("density-grid", "Write the bivariate density on a lattice as CSV");
  app.add_subcommand("generator-plot", "Write the generator density at grid midpoints as CSV");
  app.add_subcommand("rho", "Closed-form and sample Spearman's rho");
  auto* verify = app.add_subcommand("verify", "Run the verification suite");
  app.add_subcommand("probe", "Find a point where the pathological density exceeds a threshold");

  std::string names;
  for (const auto& c : modcop::check_names()) names += (names.empty() ? "" : ", ") + c;
  verify->footer("Checks: " + names + "\nInjections: each check name, plus negate-weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return modcop::cli::kUsage;
  }

  config.command = app.get_subcommands().front()->get_name();
  config.seed = seed;
  if (!interval.empty()) {
    try {
      std::tie(config.interval_lo, config.interval_hi) = modcop::cli::parse_interval(interval);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return modcop::cli::kUsage;
    }
  }
  return modcop::cli::run_command(config, std::cout, std::cerr);
}
