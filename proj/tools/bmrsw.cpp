#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bmrsw/cli.hpp"

namespace {

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(std::stod(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"B-MRSW: bootstrapped minimum robust semi-constrained Wasserstein-2 "
               "inference for simulator-defined models"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  bmrsw::cli::Overrides overrides;
  std::string lambda_arg;
  std::uint64_t seed_arg = 0;
  int workers_arg = -1;
  std::string out_arg;

  app.add_option("--config", config_path, "path to the JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed_arg, "override the master seed");
  auto* workers_opt =
      app.add_option("--workers", workers_arg, "worker threads (default: logical cores)");
  auto* out_opt = app.add_option("--out", out_arg, "override the output directory");
  auto* lambda_opt =
      app.add_option("--lambda", lambda_arg, "robustness parameter, a number or 'auto'");

  auto* simulate = app.add_subcommand(
      "simulate", "generate a contaminated dataset CSV plus its manifest");
  std::string theta_text;
  auto* rsw_eval = app.add_subcommand(
      "rsw-eval", "estimate the lambda-RSW divergence at one theta and report the "
                  "reweighting");
  rsw_eval->add_option("--theta", theta_text, "comma-separated parameter vector")
      ->required();
  auto* lambda_select = app.add_subcommand(
      "lambda-select", "run the per-lambda mini-bootstrap diagnostic and suggest an "
                       "elbow");
  auto* bootstrap = app.add_subcommand(
      "bootstrap", "run the full bootstrap inference at a fixed (or auto) lambda");
  std::string xs_path, ys_path, sigmas_text;
  auto* mmd_limit = app.add_subcommand(
      "mmd-limit", "tabulate sigma0^2 * MMD^2 against its large-bandwidth limit");
  mmd_limit->add_option("--xs", xs_path, "first sample file (one value per row)")
      ->required();
  mmd_limit->add_option("--ys", ys_path, "second sample file")->required();
  mmd_limit->add_option("--sigmas", sigmas_text,
                        "comma-separated increasing bandwidths (default 10,100,1000)");
  auto* report =
      app.add_subcommand("report", "print a readable summary of results in the output "
                                   "directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (seed_opt->count()) overrides.seed = seed_arg;
    if (workers_opt->count()) overrides.workers = workers_arg;
    if (out_opt->count()) overrides.out_dir = out_arg;
    if (lambda_opt->count()) overrides.lambda = lambda_arg;
    bmrsw::RunConfig config = bmrsw::cli::resolve_config(config_path, overrides);

    if (simulate->parsed()) return bmrsw::cli::cmd_simulate(config);
    if (rsw_eval->parsed())
      return bmrsw::cli::cmd_rsw_eval(config, parse_doubles(theta_text));
    if (lambda_select->parsed()) return bmrsw::cli::cmd_lambda_select(config);
    if (bootstrap->parsed()) return bmrsw::cli::cmd_bootstrap(config);
    if (mmd_limit->parsed())
      return bmrsw::cli::cmd_mmd_limit(config, xs_path, ys_path,
                                       sigmas_text.empty() ? std::vector<double>{}
                                                           : parse_doubles(sigmas_text));
    if (report->parsed()) return bmrsw::cli::cmd_report(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
