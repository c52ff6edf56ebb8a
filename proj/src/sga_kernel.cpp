// Hot loop of Algorithm-style stochastic sub-gradient ascent. Kept in its own
// translation unit so it can carry aggressive math flags; everything here is
// plain arithmetic on finite values.

#include <cmath>
#include <cstddef>
#include <vector>

#include "bmrsw/rsw.hpp"

namespace bmrsw::detail {

namespace {

template <bool OneD>
void run_sga(const double* atoms, std::size_t n, int dim, const double* stream,
             std::size_t s, double lambda, double scale_b, std::size_t burn_start,
             std::vector<double>& g, std::vector<SgaTraceRow>* trace,
             double* out_estimate) {
  const double inv_lambda = 1.0 / lambda;
  const double log_n = std::log(static_cast<double>(n));
  const double nd = static_cast<double>(n);
  std::vector<double> expw(n);
  double acc = 0.0, norm = 0.0;

  for (std::size_t i = 1; i <= s; ++i) {
    const double* x = stream + (i - 1) * static_cast<std::size_t>(dim);

    // Scan: shifted softmax numerators need max(-lambda g); the min term needs
    // the lowest-index argmin of ||x - Y_j||^2 - g_j.
    double max_t = -lambda * g[0];
    double min_val = 0.0;
    std::size_t j_star = 0;
    for (std::size_t j = 0; j < n; ++j) {
      double t = -lambda * g[j];
      if (t > max_t) max_t = t;
      double c;
      if constexpr (OneD) {
        double d = x[0] - atoms[j];
        c = d * d;
      } else {
        c = 0.0;
        const double* aj = atoms + j * static_cast<std::size_t>(dim);
        for (int k = 0; k < dim; ++k) {
          double d = x[k] - aj[k];
          c += d * d;
        }
      }
      double val = c - g[j];
      if (j == 0 || val < min_val) {
        min_val = val;
        j_star = j;
      }
    }

    double sum_exp = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      expw[j] = std::exp(-lambda * g[j] - max_t);
      sum_exp += expw[j];
    }

    double h1 = min_val - inv_lambda * (max_t + std::log(sum_exp) - log_n);
    double gamma = scale_b * std::sqrt(nd / static_cast<double>(i));
    if (i > burn_start) {
      acc += gamma * h1;
      norm += gamma;
    }
    if (trace) trace->push_back({i, h1, norm > 0.0 ? acc / norm : 0.0});

    double step_over_sum = gamma / sum_exp;
    for (std::size_t j = 0; j < n; ++j) g[j] += step_over_sum * expw[j];
    g[j_star] -= gamma;
  }
  *out_estimate = acc / norm;
}

}  // namespace

void sga_kernel(const double* atoms, std::size_t n, int dim, const double* stream,
                std::size_t s, double lambda, double scale_b, std::size_t burn_start,
                std::vector<double>& g, std::vector<SgaTraceRow>* trace,
                double* out_estimate) {
  if (dim == 1)
    run_sga<true>(atoms, n, dim, stream, s, lambda, scale_b, burn_start, g, trace,
                  out_estimate);
  else
    run_sga<false>(atoms, n, dim, stream, s, lambda, scale_b, burn_start, g, trace,
                   out_estimate);
}

}  // namespace bmrsw::detail
