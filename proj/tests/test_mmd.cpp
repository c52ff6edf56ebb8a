#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bmrsw/mmd.hpp"
#include "bmrsw/rng.hpp"

using namespace bmrsw;

TEST_CASE("identical samples give zero MMD") {
  std::vector<double> xs = {0.2, -1.4, 3.0, 0.2};
  for (double sigma : {0.3, 1.0, 25.0})
    CHECK(gaussian_mmd_sq(xs, xs, sigma) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("point masses match the three-term closed form") {
  std::vector<double> x0 = {0.0}, x1 = {1.0};
  for (double sigma : {0.5, 1.0, 3.0}) {
    double expected = 2.0 * (1.0 - std::exp(-1.0 / (2.0 * sigma * sigma)));
    CHECK(gaussian_mmd_sq(x0, x1, sigma) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("MMD is exactly symmetric") {
  Rng rng(6);
  std::vector<double> xs(40), ys(25);
  for (double& x : xs) x = rng.normal();
  for (double& y : ys) y = 2.0 + rng.normal();
  CHECK(gaussian_mmd_sq(xs, ys, 0.7) == gaussian_mmd_sq(ys, xs, 0.7));
}

TEST_CASE("median heuristic bandwidth on a pooled three-point set") {
  std::vector<double> xs = {0.0, 1.0}, ys = {3.0};
  CHECK(median_heuristic_bandwidth(xs, ys) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("errors on empty inputs and non-increasing bandwidths") {
  std::vector<double> xs = {1.0}, empty;
  CHECK_THROWS_AS(gaussian_mmd_sq(xs, empty, 1.0), std::length_error);
  std::vector<double> bad_sigmas = {1.0, 3.0, 2.0};
  CHECK_THROWS_AS(large_bandwidth_limit_check(xs, xs, bad_sigmas),
                  std::invalid_argument);
}

TEST_CASE("point-mass bandwidth limit approaches the squared mean gap") {
  std::vector<double> x0 = {0.0}, x1 = {1.0};
  std::vector<double> sigmas = {10.0, 100.0, 1000.0};
  auto rows = large_bandwidth_limit_check(x0, x1, sigmas);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) CHECK(row.target == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(rows[0].scaled_mmd_sq - 1.0) >=
        std::abs(rows[1].scaled_mmd_sq - 1.0));
  CHECK(std::abs(rows[1].scaled_mmd_sq - 1.0) >=
        std::abs(rows[2].scaled_mmd_sq - 1.0));
  CHECK(std::abs(rows[2].scaled_mmd_sq - 1.0) <= 1e-6);
}

TEST_CASE("identical inputs give an all-zero scaled column") {
  std::vector<double> xs = {0.1, 0.7, -0.4};
  std::vector<double> sigmas = {1.0, 10.0, 100.0};
  auto rows = large_bandwidth_limit_check(xs, xs, sigmas);
  for (const auto& row : rows) {
    CHECK(row.scaled_mmd_sq == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(row.target == 0.0);
  }
}

TEST_CASE("Monte Carlo limit for separated normals") {
  Rng rng(44);
  const std::size_t n = 10000;
  std::vector<double> xs(n), ys(n);
  for (double& x : xs) x = rng.normal();
  for (double& y : ys) y = 2.0 + rng.normal();
  double mean_x = 0.0, mean_y = 0.0;
  for (double x : xs) mean_x += x;
  for (double y : ys) mean_y += y;
  mean_x /= n;
  mean_y /= n;
  double target = (mean_x - mean_y) * (mean_x - mean_y);

  std::vector<double> sigmas = {10.0, 100.0, 1000.0};
  auto rows = large_bandwidth_limit_check(xs, ys, sigmas);
  CHECK(rows[0].target == doctest::Approx(target).epsilon(1e-12));
  double d0 = std::abs(rows[0].scaled_mmd_sq - target);
  double d1 = std::abs(rows[1].scaled_mmd_sq - target);
  double d2 = std::abs(rows[2].scaled_mmd_sq - target);
  CHECK(d1 <= d0);
  CHECK(d2 <= d1);
  CHECK(d2 <= 0.02 * std::max(1.0, target));
}
