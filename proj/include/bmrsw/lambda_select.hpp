#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "bmrsw/bootstrap.hpp"
#include "bmrsw/measures.hpp"
#include "bmrsw/simulators.hpp"

namespace bmrsw {

struct LambdaGrid {
  std::vector<double> values;  // strictly increasing, all positive

  explicit LambdaGrid(std::vector<double> v);
  /// 15 logarithmically equidistant values 10^(-2 + 4k/14), k = 0..14.
  static LambdaGrid default_grid();
};

struct LambdaDiagnostic {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> values;  // per lambda, one entry per replicate
  std::vector<double> medians, q1, q3;
  std::optional<double> suggestion;

  void to_csv(std::ostream& os) const;  // columns: lambda, replicate, value
  nlohmann::json to_json() const;
};

/// W2 (not squared) between the fitted model's empirical measure over the bank
/// and the reweighted data. Exact in 1D on all samples; in higher dimension
/// both sides are subsampled to `subsample_cap` atoms for the exact solve.
double diagnostic_value(std::span<const double> theta_fit, const DualPotential& g_final,
                        double lambda, const WeightedDiscreteMeasure& data,
                        const SimulatorSpec& spec, const NoiseBank& bank,
                        std::size_t subsample_cap = 2048);

/// Per-replicate mini-bootstraps across the grid: within a replicate the same
/// resampled dataset and noise bank serve every lambda, isolating the lambda
/// effect. base.lambda is ignored.
LambdaDiagnostic run_selection(const WeightedDiscreteMeasure& data,
                               const SimulatorSpec& spec, const LambdaGrid& grid,
                               int m_prime, const BootstrapConfig& base);

/// Max-curvature elbow detection on (log10 lambda, median): the curve is
/// truncated at its global minimum (U shapes turn back up), then after
/// min-max normalization the suggested lambda maximizes the vertical gap to
/// the first-to-last chord, subject to the gap and total-decrease
/// thresholds. Returns nullopt when no elbow qualifies (lambda = 0 policy).
std::optional<double> suggest_elbow(std::span<const double> lambdas,
                                    std::span<const double> medians,
                                    double gap_threshold = 0.1,
                                    double min_decrease = 0.2);

}  // namespace bmrsw
