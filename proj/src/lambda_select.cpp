#include "bmrsw/lambda_select.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "bmrsw/parallel.hpp"
#include "bmrsw/rsw.hpp"

namespace bmrsw {

LambdaGrid::LambdaGrid(std::vector<double> v) : values(std::move(v)) {
  if (values.empty()) throw std::invalid_argument("lambda grid must be non-empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0)) throw std::invalid_argument("lambda grid entries must be positive");
    if (i > 0 && !(values[i] > values[i - 1]))
      throw std::invalid_argument("lambda grid must be strictly increasing");
  }
}

LambdaGrid LambdaGrid::default_grid() {
  std::vector<double> v(15);
  for (int k = 0; k < 15; ++k)
    v[k] = std::pow(10.0, -2.0 + 4.0 * static_cast<double>(k) / 14.0);
  return LambdaGrid(std::move(v));
}

void LambdaDiagnostic::to_csv(std::ostream& os) const {
  os << "lambda,replicate,value\n";
  char buf[80];
  for (std::size_t li = 0; li < lambdas.size(); ++li)
    for (std::size_t j = 0; j < values[li].size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,%zu,%.17g\n", lambdas[li], j, values[li][j]);
      os << buf;
    }
}

nlohmann::json LambdaDiagnostic::to_json() const {
  nlohmann::json per_lambda = nlohmann::json::array();
  for (std::size_t li = 0; li < lambdas.size(); ++li)
    per_lambda.push_back({{"lambda", lambdas[li]},
                          {"values", values[li]},
                          {"median", medians[li]},
                          {"q1", q1[li]},
                          {"q3", q3[li]}});
  nlohmann::json j = {{"diagnostics", per_lambda}};
  if (suggestion.has_value())
    j["suggested_lambda"] = *suggestion;
  else
    j["suggested_lambda"] = nullptr;
  return j;
}

namespace {

WeightedDiscreteMeasure subsample_measure(const WeightedDiscreteMeasure& m,
                                          std::size_t cap, Rng& rng) {
  if (m.size() <= cap) return m;
  const auto dim = static_cast<std::size_t>(m.dim());
  std::vector<double> atoms(cap * dim);
  for (std::size_t i = 0; i < cap; ++i) {
    auto a = m.atom(rng.uniform_index(m.size()));
    std::copy(a.begin(), a.end(), atoms.begin() + i * dim);
  }
  return WeightedDiscreteMeasure::uniform(std::move(atoms), m.dim());
}

}  // namespace

double diagnostic_value(std::span<const double> theta_fit, const DualPotential& g_final,
                        double lambda, const WeightedDiscreteMeasure& data,
                        const SimulatorSpec& spec, const NoiseBank& bank,
                        std::size_t subsample_cap) {
  WeightedDiscreteMeasure reweighted = extract_reweighting(g_final, lambda, data);
  PointSet samples = simulate_batch(spec, theta_fit, bank);
  WeightedDiscreteMeasure model =
      WeightedDiscreteMeasure::uniform(std::move(samples.values), samples.dim);
  double w2sq;
  if (data.dim() == 1) {
    w2sq = w2sq_1d(model, reweighted);
  } else {
    Rng rng(derive_seed(bank.seed, 1, StreamPurpose::SelectionResample));
    WeightedDiscreteMeasure model_sub = subsample_measure(model, subsample_cap, rng);
    // Reweighted side keeps its weights; only the model side is an unweighted
    // sample cloud, so only it is thinned uniformly.
    w2sq = w2sq_discrete(model_sub, reweighted,
                         model_sub.size() + reweighted.size());
  }
  return std::sqrt(std::max(w2sq, 0.0));
}

LambdaDiagnostic run_selection(const WeightedDiscreteMeasure& data,
                               const SimulatorSpec& spec, const LambdaGrid& grid,
                               int m_prime, const BootstrapConfig& base) {
  if (m_prime < 2) throw std::invalid_argument("lambda selection needs m_prime >= 2");
  base.sga.validate();

  const std::size_t n_lambda = grid.values.size();
  const auto n_tasks = n_lambda * static_cast<std::size_t>(m_prime);
  std::vector<std::vector<double>> values(n_lambda,
                                          std::vector<double>(m_prime, 0.0));

  parallel_for(n_tasks, base.parallelism, [&](std::size_t task) {
    std::size_t li = task / static_cast<std::size_t>(m_prime);
    std::size_t j = task % static_cast<std::size_t>(m_prime);
    double lambda = grid.values[li];

    std::uint64_t resample_seed =
        derive_seed(base.master_seed, j, StreamPurpose::SelectionResample);
    std::uint64_t replicate_seed =
        derive_seed(base.master_seed, j, StreamPurpose::SelectionNoiseBank);

    WeightedDiscreteMeasure resampled = resample_dataset(data, resample_seed);
    BootstrapConfig cfg = base;
    cfg.lambda = lambda;
    cfg.sga.lambda = lambda;
    ReplicateFit fit = fit_one_replicate(resampled, spec, cfg, replicate_seed,
                                         static_cast<int>(j));
    NoiseBank bank =
        NoiseBank::generate(fit.bank_seed, cfg.sga.iterations, spec.noise_dim);
    values[li][j] =
        diagnostic_value(fit.theta, fit.final_potential, lambda, resampled, spec, bank);
  });

  LambdaDiagnostic diag;
  diag.lambdas = grid.values;
  diag.values = std::move(values);
  diag.medians.resize(n_lambda);
  diag.q1.resize(n_lambda);
  diag.q3.resize(n_lambda);
  for (std::size_t li = 0; li < n_lambda; ++li) {
    std::vector<double> sorted = diag.values[li];
    std::sort(sorted.begin(), sorted.end());
    diag.medians[li] = interpolated_quantile(sorted, 0.5);
    diag.q1[li] = interpolated_quantile(sorted, 0.25);
    diag.q3[li] = interpolated_quantile(sorted, 0.75);
  }
  if (n_lambda >= 3)
    diag.suggestion = suggest_elbow(diag.lambdas, diag.medians);
  return diag;
}

std::optional<double> suggest_elbow(std::span<const double> lambdas,
                                    std::span<const double> medians,
                                    double gap_threshold, double min_decrease) {
  if (lambdas.size() < 3)
    throw std::length_error("elbow detection needs at least 3 grid points");
  if (lambdas.size() != medians.size())
    throw std::invalid_argument("lambda and median arrays must have equal length");

  // The diagnostic can turn back up at very large lambda (a U shape); an
  // elbow only makes sense on the decreasing arm, so truncate at the global
  // minimum before applying the chord rule.
  std::size_t n = 1;
  for (std::size_t i = 1; i < medians.size(); ++i)
    if (medians[i] < medians[n - 1]) n = i + 1;
  if (n < 3) return std::nullopt;

  double y_min = medians[0], y_max = medians[0];
  for (std::size_t i = 0; i < n; ++i) {
    y_min = std::min(y_min, medians[i]);
    y_max = std::max(y_max, medians[i]);
  }
  if (!(y_max > y_min)) return std::nullopt;  // flat curve

  std::vector<double> x(n), y(n);
  double x0 = std::log10(lambdas[0]), x1 = std::log10(lambdas[n - 1]);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (std::log10(lambdas[i]) - x0) / (x1 - x0);
    y[i] = (medians[i] - y_min) / (y_max - y_min);
  }

  // Vertical gap between the normalized curve and the first-to-last chord.
  std::size_t best_idx = 0;
  double best_gap = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double chord = y[0] + (y[n - 1] - y[0]) * x[i];
    double gap = chord - y[i];
    if (gap > best_gap) {
      best_gap = gap;
      best_idx = i;
    }
  }
  if (best_gap < gap_threshold) return std::nullopt;
  if (!(medians[0] > 0.0)) return std::nullopt;
  double decrease = (medians[0] - medians[best_idx]) / medians[0];
  if (decrease < min_decrease) return std::nullopt;
  return lambdas[best_idx];
}

}  // namespace bmrsw
