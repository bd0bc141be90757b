#include "srd/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <optional>

#include "srd/config.hpp"
#include "srd/csv.hpp"
#include "srd/errors.hpp"
#include "srd/experiments.hpp"

namespace srd {
namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string svg;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Flags& flags) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", flags.config, "experiment config file")->required();
  sub->add_option("--out", flags.out, "CSV output path (stdout when omitted)");
  sub->add_option("--seed", flags.seed, "override the config seed");
  sub->add_option("--workers", flags.workers, "override the worker count")->check(CLI::PositiveNumber);
  return sub;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& diag) {
  CLI::App app{"Spherical-radial estimates of probability functions and their gradients"};
  app.require_subcommand(1);
  Flags flags;
  add_command(app, "estimate", "probability and gradient estimates on a grid", flags);
  add_command(app, "gradient", "gradient estimates with finite-difference and oracle checks", flags);
  add_command(app, "compare", "spherical-radial vs sample-average variance and cost", flags);
  add_command(app, "convergence", "RMSE, coverage and variance ratio over a sample-size ladder", flags);
  add_command(app, "replicate-figure", "CRN curves, sample-average curve and truth as CSV and SVG", flags)
      ->add_option("--svg", flags.svg, "SVG output path");

  // CLI11 consumes arguments from the back of the vector.
  std::vector<std::string> reversed;
  if (!args.empty()) reversed.assign(args.begin() + 1, args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    diag << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    diag << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  Command command = Command::Estimate;
  for (CLI::App* sub : app.get_subcommands()) command = *parse_command(sub->get_name());

  try {
    const Config cfg = Config::load(flags.config);
    const Experiment ex = build_experiment(command, cfg, Overrides{flags.seed, flags.workers});
    const ExperimentOutput result = run_experiment(ex);
    const std::string csv = result.table.to_string();
    write_text(flags.out, csv);
    if (!flags.svg.empty()) write_text(flags.svg, result.svg);
    for (const auto& line : result.diagnostics) diag << line << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    diag << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    diag << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    diag << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    diag << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace srd
