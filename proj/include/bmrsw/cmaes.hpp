#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "bmrsw/rng.hpp"

namespace bmrsw {

struct CmaEsConfig {
  int population = 16;  // K
  int rounds = 50;      // R
  double sigma0 = 1.0;
  std::vector<double> lower, upper;
  std::vector<double> theta0;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(theta0.size()); }
  void validate() const;
};

struct CmaEsRound {
  int round;
  double best_value;  // running best of the raw objective
  double sigma;
  std::vector<double> mean;
};

struct CmaEsReport {
  std::vector<double> best_theta;
  double best_value = 0.0;
  std::vector<CmaEsRound> history;
  std::size_t non_finite_evaluations = 0;
  std::size_t covariance_resets = 0;

  nlohmann::json to_json() const;
  void history_to_csv(std::ostream& os) const;
};

using Objective = std::function<double(std::span<const double>)>;

/// Standard (mu/mu_w, K)-CMA-ES state with cumulative step-size adaptation and
/// rank-1 plus rank-mu covariance updates. Box constraints are handled by
/// resampling an out-of-bounds candidate up to 10 times, then clipping it and
/// adding a sigma-scaled quadratic distance penalty to its ranking fitness.
class CmaEs {
 public:
  explicit CmaEs(CmaEsConfig config);

  struct Generation {
    std::vector<std::vector<double>> candidates;  // finalized, all in-bounds
    std::vector<std::vector<double>> steps;       // sampled y = (x - mean) / sigma
    std::vector<double> penalties;                // 0 unless clipped
  };

  /// K candidates drawn from Normal(mean, sigma^2 C), finalized in-bounds.
  Generation sample_generation(Rng& rng);

  /// Ranks by fitness (objective plus penalty) and applies the mean, path,
  /// covariance and step-size updates. Evaluation order must not matter to
  /// callers: fitnesses are gathered first, then ranked here.
  void update(const Generation& gen, const std::vector<double>& fitness);

  const std::vector<double>& mean() const { return mean_; }
  double sigma() const { return sigma_; }
  /// Covariance C as a dense row-major d x d matrix.
  std::vector<double> covariance() const;
  std::size_t covariance_resets() const { return covariance_resets_; }

 private:
  void decompose();

  CmaEsConfig cfg_;
  int dim_;
  int mu_;
  std::vector<double> weights_;
  double mu_eff_, c_sigma_, d_sigma_, c_c_, c_1_, c_mu_, chi_n_;
  std::vector<double> mean_, p_sigma_, p_c_;
  double sigma_;
  int generation_ = 0;
  std::size_t covariance_resets_ = 0;
  // Stored via Eigen internally; kept opaque here.
  std::vector<double> cov_, eig_basis_, eig_scale_;
};

/// Runs R generations and returns the best evaluated in-bounds point. The
/// objective must be deterministic (common random numbers upstream); a
/// non-finite value demotes that candidate instead of aborting, unless a whole
/// generation is non-finite. Candidate evaluations run on `eval_workers`
/// threads; results are identical for any worker count.
CmaEsReport cma_es_minimize(const Objective& objective, const CmaEsConfig& config,
                            int eval_workers = 1);

}  // namespace bmrsw
