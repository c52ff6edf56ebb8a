#pragma once

#include <vector>

namespace bmrsw::detail {

/// Raw transportation solve over a dense cost matrix (row-major,
/// supply.size() x demand.size()). All marginal entries must be positive.
double transport_cost(std::vector<double> supply, std::vector<double> demand,
                      std::vector<double> cost);

}  // namespace bmrsw::detail
