#include "bmrsw/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "bmrsw/parallel.hpp"

namespace bmrsw {

void BootstrapConfig::validate() const {
  if (replicates < 1) throw std::invalid_argument("bootstrap needs at least one replicate");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (parallelism < 1) throw std::invalid_argument("parallelism must be at least 1");
  sga.validate();
}

void BootstrapResult::to_csv(std::ostream& os,
                             const std::vector<std::string>& param_names) const {
  os << "replicate";
  for (const auto& n : param_names) os << ',' << n;
  os << ",loss\n";
  char buf[64];
  for (const auto& fit : fits) {
    os << fit.index;
    for (double t : fit.theta) {
      std::snprintf(buf, sizeof(buf), ",%.17g", t);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g\n", fit.loss);
    os << buf;
  }
}

nlohmann::json BootstrapResult::to_json() const {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& fit : fits)
    reps.push_back({{"index", fit.index},
                    {"theta", fit.theta},
                    {"loss", fit.loss},
                    {"resample_seed", fit.resample_seed},
                    {"bank_seed", fit.bank_seed}});
  nlohmann::json fails = nlohmann::json::array();
  for (const auto& f : failures)
    fails.push_back({{"index", f.index}, {"message", f.message}});
  return {{"requested", requested}, {"replicates", reps}, {"failures", fails}};
}

nlohmann::json BootstrapSummary::to_json(const std::vector<std::string>& param_names) const {
  nlohmann::json per_param = nlohmann::json::array();
  for (std::size_t k = 0; k < median.size(); ++k)
    per_param.push_back({{"name", k < param_names.size() ? param_names[k] : "theta_" + std::to_string(k)},
                         {"median", median[k]},
                         {"lower", lower[k]},
                         {"upper", upper[k]},
                         {"width", width[k]}});
  return {{"alpha", alpha}, {"parameters", per_param}};
}

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  q = std::clamp(q, 0.0, 1.0);
  double h = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo >= sorted.size() - 1) return sorted.back();
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

WeightedDiscreteMeasure resample_dataset(const WeightedDiscreteMeasure& data,
                                         std::uint64_t seed) {
  if (!data.has_uniform_weights(1e-9))
    throw std::invalid_argument("bootstrap resampling expects uniform data weights");
  Rng rng(seed);
  const std::size_t n = data.size();
  const auto m = static_cast<std::size_t>(data.dim());
  std::vector<double> atoms(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = rng.uniform_index(n);
    auto a = data.atom(pick);
    std::copy(a.begin(), a.end(), atoms.begin() + i * m);
  }
  return WeightedDiscreteMeasure::uniform(std::move(atoms), data.dim());
}

ReplicateFit fit_one_replicate(const WeightedDiscreteMeasure& data_resampled,
                               const SimulatorSpec& spec, const BootstrapConfig& config,
                               std::uint64_t replicate_seed, int index) {
  config.validate();
  std::uint64_t bank_seed = derive_seed(replicate_seed, 0, StreamPurpose::NoiseBank);
  NoiseBank bank = NoiseBank::generate(bank_seed, config.sga.iterations, spec.noise_dim);

  Objective objective = [&](std::span<const double> theta) {
    PointSet samples = simulate_batch(spec, theta, bank);
    return sga_estimate(data_resampled, samples, config.sga).estimate;
  };

  CmaEsConfig cma = config.cmaes;
  cma.seed = derive_seed(replicate_seed, 0, StreamPurpose::Optimizer);
  if (cma.theta0.empty()) {
    cma.theta0.assign(spec.param_lower.begin(), spec.param_lower.end());
    for (int k = 0; k < spec.param_dim; ++k)
      cma.theta0[k] = 0.5 * (spec.param_lower[k] + spec.param_upper[k]);
  }
  if (cma.lower.empty()) cma.lower = spec.param_lower;
  if (cma.upper.empty()) cma.upper = spec.param_upper;

  CmaEsReport report = cma_es_minimize(objective, cma);

  // Concluding SGA run at the optimum, reusing the bank, for the reweighting.
  PointSet samples = simulate_batch(spec, report.best_theta, bank);
  SgaResult final_run = sga_estimate(data_resampled, samples, config.sga);

  ReplicateFit fit;
  fit.index = index;
  fit.theta = report.best_theta;
  fit.loss = report.best_value;
  fit.final_potential = std::move(final_run.final_potential);
  fit.bank_seed = bank_seed;
  return fit;
}

BootstrapResult run_bootstrap(const WeightedDiscreteMeasure& data,
                              const SimulatorSpec& spec, const BootstrapConfig& config) {
  config.validate();
  const int m = config.replicates;
  std::vector<ReplicateFit> slots(m);
  std::vector<std::string> errors(m);
  std::vector<char> ok(m, 0);

  parallel_for(static_cast<std::size_t>(m), config.parallelism, [&](std::size_t i) {
    std::uint64_t resample_seed = derive_seed(config.master_seed, i, StreamPurpose::Resample);
    std::uint64_t replicate_seed = derive_seed(config.master_seed, i, StreamPurpose::Replicate);
    try {
      WeightedDiscreteMeasure resampled = resample_dataset(data, resample_seed);
      ReplicateFit fit =
          fit_one_replicate(resampled, spec, config, replicate_seed, static_cast<int>(i));
      fit.resample_seed = resample_seed;
      slots[i] = std::move(fit);
      ok[i] = 1;
    } catch (const std::exception& e) {
      errors[i] = std::string("replicate ") + std::to_string(i) + ": " + e.what();
    }
  });

  BootstrapResult result;
  result.requested = m;
  for (int i = 0; i < m; ++i) {
    if (ok[i])
      result.fits.push_back(std::move(slots[i]));
    else
      result.failures.push_back({i, errors[i]});
  }
  if (result.fits.size() * 10 < static_cast<std::size_t>(m) * 9) {
    std::string detail = result.failures.empty() ? "" : (": " + result.failures.front().message);
    throw std::runtime_error("bootstrap failed on more than 10% of replicates" + detail);
  }
  return result;
}

BootstrapSummary summarize(const BootstrapResult& result, double alpha) {
  if (result.fits.size() < 2)
    throw std::length_error("summarize needs at least 2 bootstrap samples");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");
  const std::size_t d = result.fits.front().theta.size();
  BootstrapSummary summary;
  summary.alpha = alpha;
  summary.median.resize(d);
  summary.lower.resize(d);
  summary.upper.resize(d);
  summary.width.resize(d);
  std::vector<double> column(result.fits.size());
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < result.fits.size(); ++i)
      column[i] = result.fits[i].theta[k];
    std::sort(column.begin(), column.end());
    summary.median[k] = interpolated_quantile(column, 0.5);
    summary.lower[k] = interpolated_quantile(column, alpha / 2.0);
    summary.upper[k] = interpolated_quantile(column, 1.0 - alpha / 2.0);
    summary.width[k] = summary.upper[k] - summary.lower[k];
  }
  return summary;
}

}  // namespace bmrsw
