#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "bmrsw/bootstrap.hpp"

using namespace bmrsw;

namespace {

BootstrapConfig desk_config(double lambda, std::size_t s, int rounds, int population) {
  BootstrapConfig cfg;
  cfg.lambda = lambda;
  cfg.sga.lambda = lambda;
  cfg.sga.iterations = s;
  cfg.cmaes.rounds = rounds;
  cfg.cmaes.population = population;
  return cfg;
}

WeightedDiscreteMeasure clean_normal_data(std::size_t n, std::uint64_t seed) {
  auto spec = SimulatorSpec::normal();
  std::vector<double> theta = {0.0, 1.0};
  return generate_dataset(spec, theta, ContaminationSpec{}, n, seed);
}

WeightedDiscreteMeasure contaminated_t_data(std::size_t n, std::uint64_t seed) {
  // 0.95 t(22) + 0.05 dirac at 10.
  auto spec = SimulatorSpec::student_t(22);
  std::vector<double> theta = {22.0};
  ContaminationSpec cont;
  cont.epsilon = 0.05;
  cont.dirac = {10.0};
  return generate_dataset(spec, theta, cont, n, seed);
}

}  // namespace

TEST_CASE("interpolated_quantile reproduces the order-statistic formula") {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i + 1.0;
  CHECK(interpolated_quantile(v, 0.025) == doctest::Approx(3.475).epsilon(1e-12));
  CHECK(interpolated_quantile(v, 0.975) == doctest::Approx(97.525).epsilon(1e-12));
  CHECK(interpolated_quantile(v, 0.5) == doctest::Approx(50.5).epsilon(1e-12));
}

TEST_CASE("resample_dataset basics") {
  auto single = WeightedDiscreteMeasure::uniform({3.25}, 1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto r = resample_dataset(single, seed);
    CHECK(r.size() == 1);
    CHECK(r.atoms()[0] == 3.25);
  }

  auto data = clean_normal_data(400, 1);
  auto a = resample_dataset(data, 9);
  auto b = resample_dataset(data, 9);
  CHECK(a.atoms() == b.atoms());
  CHECK(a.size() == data.size());
  CHECK(a.has_uniform_weights());
}

TEST_CASE("resample_dataset exclusion fraction matches (1 - 1/n)^n") {
  auto data = clean_normal_data(1000, 2);  // atoms are almost surely distinct
  auto resampled = resample_dataset(data, 77);
  std::set<double> kept(resampled.atoms().begin(), resampled.atoms().end());
  std::size_t missing = 0;
  for (double x : data.atoms())
    if (!kept.count(x)) ++missing;
  double fraction = static_cast<double>(missing) / data.size();
  CHECK(std::abs(fraction - 0.3677) <= 0.03);
}

TEST_CASE("resample_dataset gives each atom unit expected multiplicity") {
  auto data = WeightedDiscreteMeasure::uniform({0.0, 1.0, 2.0, 3.0, 4.0}, 1);
  double count_first = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    auto res = resample_dataset(data, 1000 + r);
    for (double x : res.atoms())
      if (x == 0.0) count_first += 1.0;
  }
  CHECK(std::abs(count_first / reps - 1.0) <= 0.05);
}

TEST_CASE("fit_one_replicate recovers a clean normal model at tiny lambda") {
  auto data = clean_normal_data(1000, 5);
  auto spec = SimulatorSpec::normal();
  auto cfg = desk_config(1e-3, 2000, 25, 12);
  cfg.cmaes.theta0 = {-5.0, 0.15};

  auto fit = fit_one_replicate(data, spec, cfg, 42);
  CHECK(std::abs(fit.theta[0] - 0.0) <= 0.15);
  CHECK(std::abs(fit.theta[1] - 1.0) <= 0.15);
  CHECK(fit.final_potential.size() == data.size());

  auto fit2 = fit_one_replicate(data, spec, cfg, 42);
  CHECK(fit.theta == fit2.theta);
  CHECK(fit.loss == fit2.loss);
}

TEST_CASE("robust lambda controls the fitted scale under contamination") {
  auto data = contaminated_t_data(1000, 31);
  auto spec = SimulatorSpec::normal();

  auto robust_cfg = desk_config(2.5, 2000, 25, 12);
  robust_cfg.cmaes.theta0 = {-5.0, 0.15};
  auto robust = fit_one_replicate(data, spec, robust_cfg, 7);
  CHECK(robust.theta[1] >= 0.85);
  CHECK(robust.theta[1] <= 1.3);

  // Near-zero lambda approximates the plain minimum-W2 fit; the potentials
  // must span the full squared diameter, so B = D^2 per the rate theorem's
  // case split.
  auto fragile_cfg = desk_config(1e-3, 2000, 25, 12);
  fragile_cfg.sga.learning_rate_scale = bounding_box_sq_diameter(data);
  fragile_cfg.cmaes.theta0 = {-5.0, 0.15};
  auto fragile = fit_one_replicate(data, spec, fragile_cfg, 7);
  CHECK(fragile.theta[1] > 1.3);
}

TEST_CASE("reweighting from a converged contaminated fit starves the outliers") {
  auto data = contaminated_t_data(500, 13);
  auto spec = SimulatorSpec::normal();
  auto cfg = desk_config(2.5, 2000, 20, 10);
  cfg.cmaes.theta0 = {-5.0, 0.15};
  auto fit = fit_one_replicate(data, spec, cfg, 3);
  auto reweighted = extract_reweighting(fit.final_potential, 2.5, data);
  double outlier_mass = 0.0;
  std::size_t outlier_count = 0;
  for (std::size_t j = 0; j < data.size(); ++j)
    if (std::abs(data.atoms()[j] - 10.0) <= 0.5) {
      outlier_mass += reweighted.weights()[j];
      ++outlier_count;
    }
  CHECK(outlier_count > 0);
  CHECK(outlier_mass < 0.01);
}

TEST_CASE("run_bootstrap single replicate and summary shape") {
  auto data = clean_normal_data(120, 3);
  auto spec = SimulatorSpec::normal();
  auto cfg = desk_config(0.5, 300, 6, 6);
  cfg.replicates = 1;
  auto result = run_bootstrap(data, spec, cfg);
  CHECK(result.fits.size() == 1);
  CHECK(result.failures.empty());
  CHECK(spec.theta_in_bounds(result.fits[0].theta));
  CHECK_THROWS_AS(summarize(result, 0.05), std::length_error);
}

TEST_CASE("run_bootstrap is invariant to the worker count") {
  auto data = clean_normal_data(100, 4);
  auto spec = SimulatorSpec::normal();
  auto cfg = desk_config(1.0, 300, 5, 6);
  cfg.replicates = 3;
  cfg.master_seed = 12;

  std::vector<BootstrapResult> results;
  for (int workers : {1, 4, 8}) {
    auto c = cfg;
    c.parallelism = workers;
    results.push_back(run_bootstrap(data, spec, c));
  }
  for (std::size_t w = 1; w < results.size(); ++w) {
    REQUIRE(results[w].fits.size() == results[0].fits.size());
    for (std::size_t i = 0; i < results[0].fits.size(); ++i) {
      CHECK(results[w].fits[i].theta == results[0].fits[i].theta);
      CHECK(results[w].fits[i].loss == results[0].fits[i].loss);
    }
  }

  std::ostringstream csv_a, csv_b;
  results[0].to_csv(csv_a, spec.param_names);
  results[1].to_csv(csv_b, spec.param_names);
  CHECK(csv_a.str() == csv_b.str());

  auto j = results[0].to_json();
  CHECK(j.at("requested").get<int>() == 3);
  CHECK(j.at("replicates").size() == 3);
  CHECK(j.at("failures").empty());
}

TEST_CASE("summarize computes marginal medians and percentile intervals") {
  BootstrapResult result;
  result.requested = 100;
  for (int i = 0; i < 100; ++i) {
    ReplicateFit fit;
    fit.index = i;
    fit.theta = {static_cast<double>(i + 1), 5.0};
    result.fits.push_back(fit);
  }
  auto summary = summarize(result, 0.05);
  CHECK(summary.median[0] == doctest::Approx(50.5).epsilon(1e-12));
  CHECK(summary.lower[0] == doctest::Approx(3.475).epsilon(1e-12));
  CHECK(summary.upper[0] == doctest::Approx(97.525).epsilon(1e-12));
  CHECK(summary.median[1] == 5.0);
  CHECK(summary.width[1] == 0.0);
  CHECK(summary.lower[0] <= summary.median[0]);
  CHECK(summary.median[0] <= summary.upper[0]);
}

TEST_CASE("clean-data intervals cover the truth at both lambda extremes") {
  auto data = clean_normal_data(800, 9);
  auto spec = SimulatorSpec::normal();
  for (double lambda : {1e-3, 2.5}) {
    auto cfg = desk_config(lambda, 1600, 15, 8);
    cfg.cmaes.theta0 = {-5.0, 0.15};
    cfg.replicates = 12;
    cfg.master_seed = 100 + static_cast<std::uint64_t>(lambda * 1000);
    if (lambda < 0.01)
      cfg.sga.learning_rate_scale = bounding_box_sq_diameter(data);
    auto summary = summarize(run_bootstrap(data, spec, cfg), 0.05);
    CHECK(summary.lower[0] <= 0.0);
    CHECK(summary.upper[0] >= 0.0);
    CHECK(summary.lower[1] <= 1.0);
    CHECK(summary.upper[1] >= 1.0);
  }
}

TEST_CASE("run_bootstrap aborts when every replicate fails") {
  auto data = clean_normal_data(50, 6);
  auto spec = SimulatorSpec::normal();
  spec.transform = [](std::span<const double>, std::span<const double>,
                      std::span<double>) {
    throw std::runtime_error("simulator crashed");
  };
  auto cfg = desk_config(1.0, 100, 4, 4);
  cfg.replicates = 4;
  CHECK_THROWS_AS(run_bootstrap(data, spec, cfg), std::runtime_error);
}
