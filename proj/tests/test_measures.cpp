#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bmrsw/measures.hpp"
#include "bmrsw/rng.hpp"

using namespace bmrsw;

namespace {

WeightedDiscreteMeasure random_measure_1d(Rng& rng, std::size_t n, bool uniform) {
  std::vector<double> atoms(n), weights(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    atoms[i] = 6.0 * rng.uniform01() - 3.0;
    weights[i] = uniform ? 1.0 : 0.05 + rng.uniform01();
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  double sum = 0.0;
  for (double w : weights) sum += w;
  weights.back() += 1.0 - sum;
  return WeightedDiscreteMeasure(std::move(atoms), 1, std::move(weights));
}

}  // namespace

TEST_CASE("measure invariants are enforced") {
  CHECK_THROWS_AS(WeightedDiscreteMeasure({}, 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(WeightedDiscreteMeasure({0.0, 1.0}, 1, {0.7, 0.7}),
                  std::invalid_argument);
  CHECK_THROWS_AS(WeightedDiscreteMeasure({0.0, 1.0}, 1, {-0.5, 1.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(WeightedDiscreteMeasure({0.0, 1.0, 2.0}, 2, {0.5, 0.5}),
                  std::invalid_argument);
  // Duplicate atoms stay distinct.
  auto m = WeightedDiscreteMeasure::uniform({1.0, 1.0, 1.0}, 1);
  CHECK(m.size() == 3);
}

TEST_CASE("kl_discrete matches hand evaluation") {
  auto p = WeightedDiscreteMeasure::uniform({0.0, 1.0}, 1);
  CHECK(kl_discrete(p, p) == doctest::Approx(0.0).epsilon(1e-15));

  auto q1 = p.with_weights({1.0, 0.0});
  CHECK(kl_discrete(q1, p) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  auto q2 = p.with_weights({0.75, 0.25});
  double expected = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
  CHECK(kl_discrete(q2, p) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(kl_discrete(q2, p) == doctest::Approx(0.130812).epsilon(1e-5));
}

TEST_CASE("kl_discrete error paths") {
  auto p = WeightedDiscreteMeasure::uniform({0.0, 1.0}, 1);
  auto other = WeightedDiscreteMeasure::uniform({0.0, 2.0}, 1);
  CHECK_THROWS_AS(kl_discrete(p, other), std::invalid_argument);

  auto q = p.with_weights({1.0, 0.0});
  auto p_degenerate = p.with_weights({0.0, 1.0});
  CHECK_THROWS_AS(kl_discrete(q, p_degenerate), AbsoluteContinuityError);
}

TEST_CASE("kl_discrete nonnegative, zero only at identity") {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto base = random_measure_1d(rng, 6, false);
    auto q = base.with_weights(random_measure_1d(rng, 6, false).weights());
    double kl = kl_discrete(q, base);
    CHECK(kl >= 0.0);
    if (q.weights() != base.weights()) CHECK(kl > 1e-8);
  }
}

TEST_CASE("w2sq_1d point masses and identity") {
  auto a = WeightedDiscreteMeasure::uniform({0.0}, 1);
  auto b = WeightedDiscreteMeasure::uniform({2.0}, 1);
  CHECK(w2sq_1d(a, b) == doctest::Approx(4.0).epsilon(1e-15));

  auto u = WeightedDiscreteMeasure::uniform({0.0, 1.0}, 1);
  CHECK(w2sq_1d(u, u) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("w2sq_1d two-atom instance against transport LP enumeration") {
  auto a = WeightedDiscreteMeasure::uniform({0.0, 1.0}, 1);
  auto b = WeightedDiscreteMeasure::uniform({1.0, 2.0}, 1);
  // Couplings of two uniform two-point measures have one degree of freedom:
  // pi = [[t, .5 - t], [.5 - t, t]].
  double best = 1e100;
  for (int k = 0; k <= 50000; ++k) {
    double t = 0.5 * k / 50000.0;
    double cost = t * 1.0 + (0.5 - t) * 4.0 + (0.5 - t) * 0.0 + t * 1.0;
    best = std::min(best, cost);
  }
  CHECK(best == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w2sq_1d(a, b) == doctest::Approx(best).epsilon(1e-9));
  CHECK(w2sq_1d(b, a) == doctest::Approx(w2sq_1d(a, b)).epsilon(1e-12));
}

TEST_CASE("w2sq_1d rejects multi-dimensional input") {
  auto a = WeightedDiscreteMeasure::uniform({0.0, 0.0}, 2);
  CHECK_THROWS_AS(w2sq_1d(a, a), std::invalid_argument);
}

TEST_CASE("w2sq_discrete single atoms and identity") {
  auto a = WeightedDiscreteMeasure::uniform({0.0, 0.0}, 2);
  auto b = WeightedDiscreteMeasure::uniform({3.0, 4.0}, 2);
  CHECK(w2sq_discrete(a, b) == doctest::Approx(25.0).epsilon(1e-15));

  Rng rng(3);
  auto m = random_measure_1d(rng, 12, false);
  CHECK(w2sq_discrete(m, m) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("w2sq_discrete 2D instance against coupling-grid enumeration") {
  // Uniform weights 1/3 put every transport-polytope vertex on the 1/30 grid,
  // so the grid minimum equals the exact optimum.
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> pa(6), pb(6);
    for (double& x : pa) x = 2.0 * rng.uniform01() - 1.0;
    for (double& x : pb) x = 2.0 * rng.uniform01() - 1.0;
    auto a = WeightedDiscreteMeasure::uniform(pa, 2);
    auto b = WeightedDiscreteMeasure::uniform(pb, 2);

    double c[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) c[i][j] = squared_distance(a.atom(i), b.atom(j));

    const int steps = 10;
    const double h = 1.0 / 30.0;
    double best = 1e100;
    for (int p11 = 0; p11 <= steps; ++p11)
      for (int p12 = 0; p12 + p11 <= steps; ++p12)
        for (int p21 = 0; p21 <= steps; ++p21)
          for (int p22 = 0; p22 + p21 <= steps; ++p22) {
            double pi11 = p11 * h, pi12 = p12 * h, pi21 = p21 * h, pi22 = p22 * h;
            double pi13 = 1.0 / 3.0 - pi11 - pi12;
            double pi23 = 1.0 / 3.0 - pi21 - pi22;
            double pi31 = 1.0 / 3.0 - pi11 - pi21;
            double pi32 = 1.0 / 3.0 - pi12 - pi22;
            if (pi13 < -1e-12 || pi23 < -1e-12 || pi31 < -1e-12 || pi32 < -1e-12)
              continue;
            double pi33 = 1.0 - pi11 - pi12 - pi13 - pi21 - pi22 - pi23 - pi31 - pi32;
            if (pi33 < -1e-12) continue;
            double cost = pi11 * c[0][0] + pi12 * c[0][1] + pi13 * c[0][2] +
                          pi21 * c[1][0] + pi22 * c[1][1] + pi23 * c[1][2] +
                          pi31 * c[2][0] + pi32 * c[2][1] + pi33 * c[2][2];
            best = std::min(best, cost);
          }
    CHECK(w2sq_discrete(a, b) == doctest::Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("w2sq_discrete agrees with the 1D quantile coupling") {
  Rng rng(101);
  for (int trial = 0; trial < 12; ++trial) {
    auto a = random_measure_1d(rng, 5 + trial * 3, trial % 2 == 0);
    auto b = random_measure_1d(rng, 7 + trial * 2, trial % 3 == 0);
    double exact = w2sq_1d(a, b);
    double general = w2sq_discrete(a, b);
    CHECK(std::abs(exact - general) <= 1e-9 * std::max(1.0, exact));
  }
}

TEST_CASE("w2sq_discrete enforces the combined atom cap") {
  Rng rng(5);
  auto a = random_measure_1d(rng, 30, true);
  auto b = random_measure_1d(rng, 30, true);
  CHECK_THROWS_AS(w2sq_discrete(a, b, 50), std::length_error);
}

TEST_CASE("square-root w2sq satisfies the triangle inequality") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    auto a = random_measure_1d(rng, 6, false);
    auto b = random_measure_1d(rng, 8, false);
    auto c = random_measure_1d(rng, 5, false);
    double ab = std::sqrt(w2sq_1d(a, b));
    double bc = std::sqrt(w2sq_1d(b, c));
    double ac = std::sqrt(w2sq_1d(a, c));
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("log_sum_exp basics") {
  std::vector<double> two_zeros = {0.0, 0.0};
  CHECK(log_sum_exp(two_zeros) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  for (double c : {-7.5, 0.0, 3.25, 1000.0}) {
    std::vector<double> single = {c};
    CHECK(log_sum_exp(single) == c);
  }

  std::vector<double> big = {1000.0, 1000.0};
  CHECK(std::isfinite(log_sum_exp(big)));
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));

  std::vector<double> empty;
  CHECK_THROWS_AS(log_sum_exp(empty), std::invalid_argument);
}

TEST_CASE("softmax_weights of zero potential is uniform") {
  for (double lambda : {0.1, 1.0, 50.0}) {
    DualPotential g(7, 0.0);
    auto w = softmax_weights(g, lambda);
    for (double x : w) CHECK(x == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
  }
}

TEST_CASE("softmax_weights worked two-atom example") {
  DualPotential g = {0.0, std::log(3.0)};
  auto w = softmax_weights(g, 1.0);
  CHECK(w[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax_weights is invariant to constant shifts") {
  Rng rng(40);
  for (int trial = 0; trial < 20; ++trial) {
    DualPotential g(9);
    for (double& x : g) x = 4.0 * rng.uniform01() - 2.0;
    double lambda = 0.2 + 3.0 * rng.uniform01();
    double shift = 40.0 * rng.uniform01() - 20.0;
    DualPotential gs = g;
    for (double& x : gs) x += shift;

    auto w = softmax_weights(g, lambda);
    auto ws = softmax_weights(gs, lambda);
    auto argmax = std::max_element(w.begin(), w.end()) - w.begin();
    auto argmax_s = std::max_element(ws.begin(), ws.end()) - ws.begin();
    CHECK(argmax == argmax_s);
    double total = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      CHECK(std::abs(w[j] - ws[j]) <= 1e-12);
      total += w[j];
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("measure CSV and JSON round-trips") {
  Rng rng(77);
  auto m = random_measure_1d(rng, 9, false);

  std::stringstream csv;
  m.to_csv(csv);
  auto m_csv = WeightedDiscreteMeasure::from_csv(csv);
  CHECK(m_csv.atoms() == m.atoms());
  CHECK(m_csv.weights() == m.weights());

  auto m_json = WeightedDiscreteMeasure::from_json(m.to_json());
  CHECK(m_json.atoms() == m.atoms());
  CHECK(m_json.weights() == m.weights());

  std::stringstream bad("1.0,not_a_number\n");
  CHECK_THROWS_AS(WeightedDiscreteMeasure::from_csv(bad), std::invalid_argument);
}
