#pragma once

#include <span>
#include <vector>

namespace bmrsw {

/// Squared MMD with the Gaussian kernel exp(-(x-y)^2 / (2 sigma0^2)), as a
/// V-statistic (diagonal terms included), so point-mass inputs reproduce the
/// population value exactly. 1D samples.
double gaussian_mmd_sq(std::span<const double> xs, std::span<const double> ys,
                       double sigma0);

/// Median of pairwise absolute distances over the pooled samples.
double median_heuristic_bandwidth(std::span<const double> xs,
                                  std::span<const double> ys);

struct MmdLimitRow {
  double sigma0;
  double scaled_mmd_sq;  // sigma0^2 * MMD^2
  double target;         // (mean(xs) - mean(ys))^2
};

/// Tabulates sigma0^2 * MMD^2 across increasing bandwidths against its
/// large-bandwidth limit, the squared mean gap.
std::vector<MmdLimitRow> large_bandwidth_limit_check(std::span<const double> xs,
                                                     std::span<const double> ys,
                                                     std::span<const double> sigmas);

}  // namespace bmrsw
