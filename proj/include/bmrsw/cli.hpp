#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bmrsw/config.hpp"
#include "bmrsw/measures.hpp"

namespace bmrsw::cli {

/// Command-line / environment overrides applied on top of the config file.
/// Env: BMRSW_SEED, BMRSW_WORKERS. Flags win over env, env over file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::optional<std::string> lambda;  // number or "auto"
};

RunConfig resolve_config(const std::string& config_path, const Overrides& overrides);

/// Effective worker count (0 in config means all logical cores).
int effective_workers(const RunConfig& config);

/// Dataset from the config: generated, or loaded from CSV.
WeightedDiscreteMeasure load_dataset(const RunConfig& config);

/// Explicit lambda, or the suggestion recorded by the most recent
/// lambda-selection run in the output directory (lambda = 0 policy maps to
/// the smallest usable value, 1e-3).
double resolve_lambda(const RunConfig& config);

int cmd_simulate(const RunConfig& config);
int cmd_rsw_eval(const RunConfig& config, const std::vector<double>& theta,
                 std::size_t top_k = 10);
int cmd_lambda_select(const RunConfig& config);
int cmd_bootstrap(const RunConfig& config);
int cmd_mmd_limit(const RunConfig& config, const std::string& xs_path,
                  const std::string& ys_path, const std::vector<double>& sigmas);
int cmd_report(const RunConfig& config);

}  // namespace bmrsw::cli
