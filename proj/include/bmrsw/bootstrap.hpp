#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmrsw/cmaes.hpp"
#include "bmrsw/measures.hpp"
#include "bmrsw/rsw.hpp"
#include "bmrsw/simulators.hpp"

namespace bmrsw {

struct BootstrapConfig {
  int replicates = 100;  // M
  double lambda = 1.0;
  SgaConfig sga;      // s defaults to 20000, B = 1, g0 = 0
  CmaEsConfig cmaes;  // bounds/theta0 filled from the simulator by callers
  std::uint64_t master_seed = 0;
  int parallelism = 1;

  void validate() const;
};

struct ReplicateFit {
  int index = 0;
  std::vector<double> theta;
  double loss = 0.0;
  DualPotential final_potential;
  std::uint64_t resample_seed = 0;
  std::uint64_t bank_seed = 0;
};

struct BootstrapResult {
  std::vector<ReplicateFit> fits;  // successful replicates, in index order
  struct Failure {
    int index;
    std::string message;
  };
  std::vector<Failure> failures;
  int requested = 0;

  void to_csv(std::ostream& os, const std::vector<std::string>& param_names) const;
  nlohmann::json to_json() const;
};

struct BootstrapSummary {
  double alpha = 0.05;
  std::vector<double> median;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> width;

  nlohmann::json to_json(const std::vector<std::string>& param_names) const;
};

/// Empirical quantile with linear interpolation between order statistics
/// (values must be sorted ascending).
double interpolated_quantile(const std::vector<double>& sorted, double q);

/// n atoms drawn uniformly with replacement; uniform weights; deterministic
/// given the seed.
WeightedDiscreteMeasure resample_dataset(const WeightedDiscreteMeasure& data,
                                         std::uint64_t seed);

/// One bootstrap replicate: draws a fresh noise bank from replicate_seed that
/// stays fixed for every CMA-ES objective evaluation, minimizes the SGA
/// estimate of the lambda-RSW divergence over theta, and reruns SGA at the
/// optimum (same bank) to report the final potential.
ReplicateFit fit_one_replicate(const WeightedDiscreteMeasure& data_resampled,
                               const SimulatorSpec& spec, const BootstrapConfig& config,
                               std::uint64_t replicate_seed, int index = 0);

/// M replicates with per-replicate seeds derived from (master_seed, index);
/// runs up to config.parallelism replicates concurrently, result invariant to
/// the worker count. Fails if more than 10% of replicates fail.
BootstrapResult run_bootstrap(const WeightedDiscreteMeasure& data,
                              const SimulatorSpec& spec, const BootstrapConfig& config);

/// Marginal medians and [alpha/2, 1-alpha/2] percentile intervals.
BootstrapSummary summarize(const BootstrapResult& result, double alpha = 0.05);

}  // namespace bmrsw
