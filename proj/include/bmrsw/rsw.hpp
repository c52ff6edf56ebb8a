#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "bmrsw/measures.hpp"

namespace bmrsw {

/// Inputs of the stochastic sub-gradient ascent estimator of the semi-discrete
/// lambda-RSW divergence. The learning rate at iteration i is
/// learning_rate_scale * sqrt(n / i).
struct SgaConfig {
  std::size_t iterations = 20000;      // s
  double learning_rate_scale = 1.0;    // B
  double lambda = 1.0;
  DualPotential g0;                    // empty means the zero vector
  double burn_in_fraction = 0.6;       // average over the last 40% by default
  std::uint64_t seed = 0;              // provenance of the sample stream
  bool record_trace = false;

  void validate() const;
};

struct SgaTraceRow {
  std::size_t iteration;
  double h1_value;
  double running_estimate;
};

struct SgaResult {
  double estimate = 0.0;
  DualPotential final_potential;
  std::vector<SgaTraceRow> trace;

  nlohmann::json to_json() const;
  void trace_to_csv(std::ostream& os) const;
};

/// h1(x, g) = min_j (||x - Y_j||^2 - g_j) - (1/lambda) log sum_t (1/n) exp(-lambda g_t).
double h1_eval(std::span<const double> x, const DualPotential& g, double lambda,
               const WeightedDiscreteMeasure& data);

/// Element of the superdifferential of h1 in g: softmax_weights(g, lambda)
/// minus the indicator of the lowest-index argmin atom. Entries sum to zero.
std::vector<double> h1_subgradient(std::span<const double> x, const DualPotential& g,
                                   double lambda, const WeightedDiscreteMeasure& data);

/// Stochastic sub-gradient ascent over the sample stream. The stream must hold
/// exactly config.iterations points; iterations up to
/// floor(burn_in_fraction * s) update the potential but are excluded from the
/// returned weighted running average. Runs in O(n * s).
SgaResult sga_estimate(const WeightedDiscreteMeasure& data, const PointSet& stream,
                       const SgaConfig& config);

/// Reweighted data measure with weights softmax_weights(g_final, lambda).
WeightedDiscreteMeasure extract_reweighting(const DualPotential& g_final, double lambda,
                                            const WeightedDiscreteMeasure& data);

struct DualEval {
  double value;
  std::vector<double> gradient;
};

/// Dual objective and gradient with the expectation taken against a finite
/// discrete measure, so Laguerre-cell masses are exact sums. Cell-assignment
/// ties break to the lowest index.
DualEval exact_dual_objective(const WeightedDiscreteMeasure& p_discrete,
                              const DualPotential& g, double lambda,
                              const WeightedDiscreteMeasure& data);

struct DualMaxResult {
  double value = 0.0;
  DualPotential g_star;
  double grad_inf_norm = 0.0;
  double duality_gap = 0.0;
  std::size_t iterations = 0;
};

/// Raised when the dual maximizer hits its iteration cap; carries the best
/// iterate found so far for diagnostics.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, DualMaxResult best)
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  DualMaxResult best_iterate;
};

/// Deterministic maximization of the concave dual objective for a discrete
/// reference measure. Stops when the selected gradient has inf-norm <= tol or
/// when the certified primal-dual gap drops below tol (the optimum can sit on
/// an assignment tie, where no single-valued gradient selection vanishes).
DualMaxResult exact_dual_maximize(const WeightedDiscreteMeasure& p_discrete, double lambda,
                                  const WeightedDiscreteMeasure& data, double tol,
                                  std::size_t max_iterations = 200000);

/// Direct minimization of (1/lambda) KL(Q_w, P_n) + W2^2(p_discrete, Q_w) over
/// a simplex grid; n <= 3 atoms only. Upper-bounds the true infimum.
double primal_bruteforce(const WeightedDiscreteMeasure& p_discrete, double lambda,
                         const WeightedDiscreteMeasure& data, double grid_step);

}  // namespace bmrsw
