#include "bmrsw/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmrsw {

namespace {

double mean_kernel(std::span<const double> a, std::span<const double> b, double inv_two_sq) {
  double total = 0.0;
  for (double x : a)
    for (double y : b) total += std::exp(-(x - y) * (x - y) * inv_two_sq);
  return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double gaussian_mmd_sq(std::span<const double> xs, std::span<const double> ys,
                       double sigma0) {
  if (xs.empty() || ys.empty())
    throw std::length_error("MMD needs non-empty samples on both sides");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  // Canonical argument order keeps the cross-term summation order fixed, so
  // the estimator is exactly symmetric in its inputs.
  if (std::lexicographical_compare(ys.begin(), ys.end(), xs.begin(), xs.end()))
    std::swap(xs, ys);
  double inv_two_sq = 1.0 / (2.0 * sigma0 * sigma0);
  double v = mean_kernel(xs, xs, inv_two_sq) + mean_kernel(ys, ys, inv_two_sq) -
             2.0 * mean_kernel(xs, ys, inv_two_sq);
  return std::max(v, 0.0);
}

double median_heuristic_bandwidth(std::span<const double> xs,
                                  std::span<const double> ys) {
  std::vector<double> pooled(xs.begin(), xs.end());
  pooled.insert(pooled.end(), ys.begin(), ys.end());
  if (pooled.size() < 2)
    throw std::length_error("median heuristic needs at least two pooled points");
  std::vector<double> dists;
  dists.reserve(pooled.size() * (pooled.size() - 1) / 2);
  for (std::size_t i = 0; i < pooled.size(); ++i)
    for (std::size_t j = i + 1; j < pooled.size(); ++j)
      dists.push_back(std::abs(pooled[i] - pooled[j]));
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  if (dists.size() % 2 == 1) return *mid;
  double hi = *mid;
  double lo = *std::max_element(dists.begin(), mid);
  return 0.5 * (lo + hi);
}

std::vector<MmdLimitRow> large_bandwidth_limit_check(std::span<const double> xs,
                                                     std::span<const double> ys,
                                                     std::span<const double> sigmas) {
  if (sigmas.size() < 3)
    throw std::invalid_argument("bandwidth limit check needs at least 3 bandwidths");
  for (std::size_t i = 1; i < sigmas.size(); ++i)
    if (!(sigmas[i] > sigmas[i - 1]))
      throw std::invalid_argument("bandwidths must be increasing");
  double gap = mean(xs) - mean(ys);
  double target = gap * gap;
  std::vector<MmdLimitRow> rows;
  rows.reserve(sigmas.size());
  for (double s : sigmas)
    rows.push_back({s, s * s * gaussian_mmd_sq(xs, ys, s), target});
  return rows;
}

}  // namespace bmrsw
