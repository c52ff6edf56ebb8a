#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bmrsw/rsw.hpp"
#include "bmrsw/simulators.hpp"

using namespace bmrsw;

TEST_CASE("gandk_transform worked values") {
  CHECK(gandk_transform(3.0, 1.0, 2.0, 0.5, 0.0) == doctest::Approx(3.0).epsilon(1e-15));

  // g = k = 0 reduces to a + b z.
  for (double z : {-2.0, -0.3, 0.0, 1.7}) {
    CHECK(gandk_transform(1.5, 2.0, 0.0, 0.0, z) ==
          doctest::Approx(1.5 + 2.0 * z).epsilon(1e-14));
  }

  double expected = 3.0 + (1.0 + 0.8 * std::tanh(1.0)) * std::sqrt(2.0);
  CHECK(gandk_transform(3.0, 1.0, 2.0, 0.5, 1.0) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("gandk_transform is increasing in z over the benchmark region") {
  const double thetas[][4] = {
      {3.0, 1.0, 2.0, 0.5}, {0.0, 1.0, 0.0, 0.0}, {3.0, 1.0, 5.0, 0.2},
      {-2.0, 0.5, 1.0, 1.0}};
  for (const auto& th : thetas) {
    double prev = gandk_transform(th[0], th[1], th[2], th[3], -5.0);
    for (int k = 1; k <= 200; ++k) {
      double z = -5.0 + 10.0 * k / 200.0;
      double cur = gandk_transform(th[0], th[1], th[2], th[3], z);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("normal_transform worked values") {
  CHECK(normal_transform(0.0, 1.0, 1.3) == 1.3);
  CHECK(normal_transform(4.2, 3.0, 0.0) == 4.2);
  CHECK(normal_transform(-5.0, 0.15, 2.0) == doctest::Approx(-4.7).epsilon(1e-15));
}

TEST_CASE("student_t_sample moments at nu = 22") {
  Rng rng(2024);
  const std::size_t n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = student_t_sample(22.0, rng);
    sum += t;
    sum_sq += t * t;
  }
  double mean = sum / n;
  double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) <= 0.01);
  CHECK(std::abs(var - 22.0 / 20.0) <= 0.02);
}

TEST_CASE("student_t_sample approaches the normal for huge nu") {
  Rng rng(5);
  const std::size_t n = 100000;
  std::vector<double> draws(n);
  for (double& d : draws) d = student_t_sample(1e9, rng);
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double cdf = 0.5 * std::erfc(-draws[i] / std::sqrt(2.0));
    double lo = static_cast<double>(i) / n, hi = static_cast<double>(i + 1) / n;
    ks = std::max(ks, std::max(std::abs(cdf - lo), std::abs(cdf - hi)));
  }
  CHECK(ks < 0.01);
}

TEST_CASE("discretize floors to the grid") {
  CHECK(discretize(0.10, 0.05) == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(discretize(0.123, 0.05) == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(discretize(-0.01, 0.05) == doctest::Approx(-0.05).epsilon(1e-12));
  for (double x : {-3.21, -0.004, 1.9999, 17.3}) {
    double y = discretize(x, 0.05);
    CHECK(y <= x + 1e-12);
    CHECK(x < y + 0.05 + 1e-12);
  }
}

TEST_CASE("generate_dataset pure model draws match analytic moments") {
  auto spec = SimulatorSpec::normal();
  std::vector<double> theta = {1.5, 2.0};
  ContaminationSpec none;
  auto data = generate_dataset(spec, theta, none, 200000, 99);
  double sum = 0.0, sum_sq = 0.0;
  for (double x : data.atoms()) {
    sum += x;
    sum_sq += x * x;
  }
  double mean = sum / data.size();
  double var = sum_sq / data.size() - mean * mean;
  CHECK(std::abs(mean - 1.5) <= 0.02);
  CHECK(std::abs(var - 4.0) <= 0.05);
}

TEST_CASE("generate_dataset full contamination emits only the dirac atom") {
  auto spec = SimulatorSpec::normal();
  std::vector<double> theta = {0.0, 1.0};
  ContaminationSpec cont;
  cont.epsilon = 1.0;
  cont.dirac = {50.0};
  auto data = generate_dataset(spec, theta, cont, 50, 7);
  for (double x : data.atoms()) CHECK(x == 50.0);
}

TEST_CASE("generate_dataset contaminant fraction concentrates near epsilon") {
  auto spec = SimulatorSpec::normal();
  std::vector<double> theta = {0.0, 1.0};
  ContaminationSpec cont;
  cont.epsilon = 0.05;
  cont.dirac = {50.0};
  auto data = generate_dataset(spec, theta, cont, 100000, 11);
  std::size_t hits = 0;
  for (double x : data.atoms())
    if (x == 50.0) ++hits;
  double fraction = static_cast<double>(hits) / data.size();
  CHECK(fraction >= 0.045);
  CHECK(fraction <= 0.055);
}

TEST_CASE("generate_dataset discretization applies to clean draws only") {
  auto spec = SimulatorSpec::normal();
  std::vector<double> theta = {0.0, 1.0};
  ContaminationSpec cont;
  cont.epsilon = 0.3;
  cont.rho = 0.05;
  cont.dirac = {50.017};
  auto data = generate_dataset(spec, theta, cont, 5000, 13);
  for (double x : data.atoms()) {
    if (x == 50.017) continue;  // contaminant kept verbatim
    // Clean draws sit on the 0.05 grid.
    double k = x / 0.05;
    CHECK(std::abs(k - std::round(k)) <= 1e-9);
  }
}

TEST_CASE("generate_dataset supports a nested contaminant simulator") {
  auto spec = SimulatorSpec::normal();
  std::vector<double> theta = {0.0, 1.0};
  ContaminationSpec cont;
  cont.epsilon = 0.5;
  cont.simulator = SimulatorSpec::normal();
  cont.simulator_theta = {8.0, 1.0};
  auto data = generate_dataset(spec, theta, cont, 20000, 17);
  // Mixture of N(0,1) and N(8,1): both put negligible mass near 4, so a
  // midpoint split counts the two components.
  std::size_t high = 0;
  for (double x : data.atoms())
    if (x > 4.0) ++high;
  double fraction = static_cast<double>(high) / data.size();
  CHECK(fraction >= 0.47);
  CHECK(fraction <= 0.53);
}

TEST_CASE("generate_dataset is deterministic in its seed") {
  auto spec = SimulatorSpec::gandk();
  std::vector<double> theta = {3.0, 1.0, 2.0, 0.5};
  ContaminationSpec cont;
  cont.epsilon = 0.05;
  cont.rho = 0.05;
  cont.dirac = {50.0};
  auto a = generate_dataset(spec, theta, cont, 500, 21);
  auto b = generate_dataset(spec, theta, cont, 500, 21);
  CHECK(a.atoms() == b.atoms());
  auto c = generate_dataset(spec, theta, cont, 500, 22);
  CHECK(a.atoms() != c.atoms());
}

TEST_CASE("noise bank regeneration is bit-identical") {
  auto a = NoiseBank::generate(42, 1000, 1);
  auto b = NoiseBank::generate(42, 1000, 1);
  CHECK(a.draws == b.draws);
  auto c = NoiseBank::generate(43, 1000, 1);
  CHECK(a.draws != c.draws);
}

TEST_CASE("simulate_batch applies the bank in order and deterministically") {
  auto spec = SimulatorSpec::normal();
  std::vector<double> theta = {0.0, 1.0};
  auto bank = NoiseBank::generate(42, 250, 1);
  auto batch1 = simulate_batch(spec, theta, bank);
  auto batch2 = simulate_batch(spec, theta, bank);
  CHECK(batch1.size() == 250);
  CHECK(batch1.values == batch2.values);
  for (std::size_t i = 0; i < bank.count; ++i)
    CHECK(batch1.values[i] == bank.draws[i]);  // identity transform at (0, 1)

  std::vector<double> out_of_bounds = {0.0, -1.0};
  CHECK_THROWS_AS(simulate_batch(spec, out_of_bounds, bank), std::invalid_argument);
}

TEST_CASE("student_t simulator spec matches the sampling construction") {
  auto spec = SimulatorSpec::student_t(22);
  CHECK(spec.noise_dim == 23);
  std::vector<double> theta = {22.0};
  auto bank = NoiseBank::generate(3, 200000, spec.noise_dim);
  auto batch = simulate_batch(spec, theta, bank);
  double sum = 0.0, sum_sq = 0.0;
  for (double x : batch.values) {
    sum += x;
    sum_sq += x * x;
  }
  double mean = sum / batch.size();
  double var = sum_sq / batch.size() - mean * mean;
  CHECK(std::abs(mean) <= 0.01);
  CHECK(std::abs(var - 1.1) <= 0.05);
}

TEST_CASE("common random numbers make the SGA objective deterministic in theta") {
  auto spec = SimulatorSpec::normal();
  Rng rng(8);
  std::vector<double> atoms(50);
  for (double& a : atoms) a = rng.normal();
  auto data = WeightedDiscreteMeasure::uniform(atoms, 1);
  auto bank = NoiseBank::generate(12, 2000, 1);
  SgaConfig cfg;
  cfg.iterations = 2000;
  cfg.lambda = 1.0;
  std::vector<double> theta = {0.4, 1.2};
  double v1 = sga_estimate(data, simulate_batch(spec, theta, bank), cfg).estimate;
  double v2 = sga_estimate(data, simulate_batch(spec, theta, bank), cfg).estimate;
  CHECK(v1 == v2);
}

TEST_CASE("simulator lookup by name") {
  CHECK(SimulatorSpec::by_name("normal").param_dim == 2);
  CHECK(SimulatorSpec::by_name("gandk").param_dim == 4);
  CHECK(SimulatorSpec::by_name("student_t").noise_dim == 23);
  CHECK_THROWS_AS(SimulatorSpec::by_name("cauchy"), std::invalid_argument);
}

TEST_CASE("contamination spec validation") {
  ContaminationSpec bad_eps;
  bad_eps.epsilon = 1.5;
  bad_eps.dirac = {1.0};
  CHECK_THROWS_AS(bad_eps.validate(), std::invalid_argument);

  ContaminationSpec no_source;
  no_source.epsilon = 0.1;
  CHECK_THROWS_AS(no_source.validate(), std::invalid_argument);

  ContaminationSpec bad_rho;
  bad_rho.rho = -0.5;
  CHECK_THROWS_AS(bad_rho.validate(), std::invalid_argument);
}
