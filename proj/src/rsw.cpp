#include "bmrsw/rsw.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "bmrsw/detail/transport.hpp"

namespace bmrsw {

namespace detail {
void sga_kernel(const double* atoms, std::size_t n, int dim, const double* stream,
                std::size_t s, double lambda, double scale_b, std::size_t burn_start,
                std::vector<double>& g, std::vector<SgaTraceRow>* trace,
                double* out_estimate);
}

void SgaConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("SGA needs at least one iteration");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(learning_rate_scale > 0.0))
    throw std::invalid_argument("learning rate scale B must be positive");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
    throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
}

nlohmann::json SgaResult::to_json() const {
  return {{"estimate", estimate}, {"final_potential", final_potential}};
}

void SgaResult::trace_to_csv(std::ostream& os) const {
  os << "iteration,h1_value,running_estimate\n";
  char buf[80];
  for (const auto& row : trace) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", row.iteration, row.h1_value,
                  row.running_estimate);
    os << buf;
  }
}

namespace {

void check_h1_inputs(std::span<const double> x, const DualPotential& g,
                     double lambda, const WeightedDiscreteMeasure& data) {
  if (g.size() != data.size())
    throw std::invalid_argument("dual potential length must equal the atom count");
  if (x.size() != static_cast<std::size_t>(data.dim()))
    throw std::invalid_argument("point dimension does not match the data atoms");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!data.has_uniform_weights(1e-9))
    throw std::invalid_argument("h1 is defined against the unreweighted empirical measure");
}

// min_j ||x - Y_j||^2 - g_j with lowest-index tie break.
std::pair<double, std::size_t> min_shifted_cost(std::span<const double> x,
                                                const DualPotential& g,
                                                const WeightedDiscreteMeasure& data) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t j_star = 0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    double val = squared_distance(x, data.atom(j)) - g[j];
    if (val < best) {
      best = val;
      j_star = j;
    }
  }
  return {best, j_star};
}

double log_term(const DualPotential& g, double lambda) {
  std::vector<double> v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) v[j] = -lambda * g[j];
  return (log_sum_exp(v) - std::log(static_cast<double>(g.size()))) / lambda;
}

}  // namespace

double h1_eval(std::span<const double> x, const DualPotential& g, double lambda,
               const WeightedDiscreteMeasure& data) {
  check_h1_inputs(x, g, lambda, data);
  return min_shifted_cost(x, g, data).first - log_term(g, lambda);
}

std::vector<double> h1_subgradient(std::span<const double> x, const DualPotential& g,
                                   double lambda, const WeightedDiscreteMeasure& data) {
  check_h1_inputs(x, g, lambda, data);
  std::vector<double> sub = softmax_weights(g, lambda);
  sub[min_shifted_cost(x, g, data).second] -= 1.0;
  return sub;
}

SgaResult sga_estimate(const WeightedDiscreteMeasure& data, const PointSet& stream,
                       const SgaConfig& config) {
  config.validate();
  if (!data.has_uniform_weights(1e-9))
    throw std::invalid_argument("sga_estimate requires uniform data weights");
  if (stream.size() == 0) throw std::invalid_argument("empty sample stream");
  if (stream.dim != data.dim())
    throw std::invalid_argument("sample stream dimension does not match data atoms");
  if (stream.size() != config.iterations)
    throw std::invalid_argument("sample stream must hold exactly s = " +
                                std::to_string(config.iterations) + " points");

  SgaResult result;
  result.final_potential =
      config.g0.empty() ? DualPotential(data.size(), 0.0) : config.g0;
  if (result.final_potential.size() != data.size())
    throw std::invalid_argument("g0 length must equal the atom count");
  if (config.record_trace) result.trace.reserve(config.iterations);

  auto burn_start = static_cast<std::size_t>(
      std::floor(config.burn_in_fraction * static_cast<double>(config.iterations)));
  detail::sga_kernel(data.atoms().data(), data.size(), data.dim(),
                     stream.values.data(), config.iterations, config.lambda,
                     config.learning_rate_scale, burn_start, result.final_potential,
                     config.record_trace ? &result.trace : nullptr, &result.estimate);
  return result;
}

WeightedDiscreteMeasure extract_reweighting(const DualPotential& g_final, double lambda,
                                            const WeightedDiscreteMeasure& data) {
  if (g_final.size() != data.size())
    throw std::invalid_argument("dual potential length must equal the atom count");
  return data.with_weights(softmax_weights(g_final, lambda));
}

DualEval exact_dual_objective(const WeightedDiscreteMeasure& p_discrete,
                              const DualPotential& g, double lambda,
                              const WeightedDiscreteMeasure& data) {
  if (g.size() != data.size())
    throw std::invalid_argument("dual potential length must equal the atom count");
  if (p_discrete.dim() != data.dim())
    throw std::invalid_argument("reference measure dimension does not match data");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");

  DualEval out;
  out.gradient = softmax_weights(g, lambda);
  std::vector<double> cell_mass(data.size(), 0.0);
  double min_part = 0.0;
  for (std::size_t i = 0; i < p_discrete.size(); ++i) {
    auto [val, j_star] = min_shifted_cost(p_discrete.atom(i), g, data);
    min_part += p_discrete.weights()[i] * val;
    cell_mass[j_star] += p_discrete.weights()[i];
  }
  out.value = min_part - log_term(g, lambda);
  for (std::size_t j = 0; j < data.size(); ++j) out.gradient[j] -= cell_mass[j];
  return out;
}

namespace {

// KL(w, data weights); softmax weights are strictly positive so only the data
// side needs a positivity guard.
double kl_to_weights(const std::vector<double>& w, const std::vector<double>& base) {
  double kl = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == 0.0) continue;
    if (base[j] == 0.0)
      throw AbsoluteContinuityError("reweighting puts mass on a zero-weight atom");
    kl += w[j] * std::log(w[j] / base[j]);
  }
  return std::max(kl, 0.0);
}

// (1/lambda) KL(Q_w, data) + W2^2(p, Q_w): a primal value, hence an upper
// bound on the dual optimum. Used to certify convergence by gap.
double primal_value(const WeightedDiscreteMeasure& p_discrete, double lambda,
                    const WeightedDiscreteMeasure& data, const std::vector<double>& w) {
  double kl = kl_to_weights(w, data.weights());
  double w2;
  if (data.dim() == 1) {
    w2 = w2sq_1d(p_discrete, data.with_weights(w));
  } else {
    w2 = w2sq_discrete(p_discrete, data.with_weights(w),
                       std::numeric_limits<std::size_t>::max());
  }
  return kl / lambda + w2;
}

std::vector<std::size_t> sorted_order_1d(const WeightedDiscreteMeasure& m) {
  std::vector<std::size_t> idx(m.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return m.atoms()[a] < m.atoms()[b];
  });
  return idx;
}

// Exact 1D transport between p_discrete and the reweighted data, together
// with a data-side Kantorovich potential recovered along the monotone
// coupling. At a mass tie the walk continues through the last source atom of
// the finished cell, which keeps the potential pair dual-feasible for the
// squared cost.
struct Transport1d {
  double w2sq;
  std::vector<double> psi;  // aligned to the data's original atom order
};

Transport1d transport_potential_1d(const WeightedDiscreteMeasure& p_discrete,
                                   const std::vector<std::size_t>& order_p,
                                   const std::vector<double>& w,
                                   const WeightedDiscreteMeasure& data,
                                   const std::vector<std::size_t>& order_d) {
  Transport1d out;
  out.psi.assign(data.size(), 0.0);
  double cost = 0.0;

  std::size_t i = 0, j = 0;
  double ra = p_discrete.weights()[order_p[0]];
  double rb = w[order_d[0]];
  double x = p_discrete.atoms()[order_p[0]];
  double y = data.atoms()[order_d[0]];
  double psi_j = 0.0;
  out.psi[order_d[0]] = 0.0;
  while (true) {
    while (ra <= 0.0 && i + 1 < order_p.size()) {
      ++i;
      ra = p_discrete.weights()[order_p[i]];
      x = p_discrete.atoms()[order_p[i]];
    }
    if (rb <= 0.0 && j + 1 < order_d.size()) {
      // Advance the data atom; the connector is the current source atom x.
      double y_next = data.atoms()[order_d[j + 1]];
      psi_j += (y_next - y) * (y_next + y - 2.0 * x);
      ++j;
      y = y_next;
      rb = w[order_d[j]];
      out.psi[order_d[j]] = psi_j;
      continue;
    }
    if (ra <= 0.0 || rb <= 0.0) break;
    double mass = std::min(ra, rb);
    cost += mass * (x - y) * (x - y);
    ra -= mass;
    rb -= mass;
  }
  out.w2sq = cost;
  return out;
}

}  // namespace

DualMaxResult exact_dual_maximize(const WeightedDiscreteMeasure& p_discrete, double lambda,
                                  const WeightedDiscreteMeasure& data, double tol,
                                  std::size_t max_iterations) {
  const std::size_t atom_cap = data.dim() == 1 ? 100000 : 10000;
  if (p_discrete.size() > atom_cap)
    throw std::length_error("exact_dual_maximize reference measure too large (" +
                            std::to_string(p_discrete.size()) + " atoms)");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

  const std::size_t n = data.size();
  DualPotential g(n, 0.0);
  auto eval = [&](const DualPotential& gg) { return exact_dual_objective(p_discrete, gg, lambda, data); };

  // Primal candidates built from the current iterate tighten the upper bound;
  // the optimum may sit on an assignment tie where no single-valued gradient
  // selection vanishes, so convergence is certified by the sandwich
  // upper - lower <= tol rather than by the gradient norm alone.
  double upper = std::numeric_limits<double>::infinity();
  auto tighten_upper = [&](const DualPotential& gg, const DualEval& at) {
    std::vector<double> w = softmax_weights(gg, lambda);
    upper = std::min(upper, primal_value(p_discrete, lambda, data, w));
    std::vector<double> cells(n);
    for (std::size_t j = 0; j < n; ++j) cells[j] = std::max(w[j] - at.gradient[j], 0.0);
    double total = 0.0;
    for (double c : cells) total += c;
    if (total > 0.0) {
      for (double& c : cells) c /= total;
      upper = std::min(upper, primal_value(p_discrete, lambda, data, cells));
    }
  };

  DualEval cur = eval(g);
  DualMaxResult best{cur.value, g, 0.0, std::numeric_limits<double>::infinity(), 0};
  tighten_upper(g, cur);
  double step = 1.0;

  // In one dimension, alternate softmax reweighting with exact
  // quantile-coupling potentials; each round yields a primal upper bound and
  // a dual candidate, so the sandwich closes without slow subgradient tails.
  std::vector<std::size_t> order_p, order_d;
  if (data.dim() == 1) {
    order_p = sorted_order_1d(p_discrete);
    order_d = sorted_order_1d(data);
  }
  auto polish_1d = [&]() {
    if (data.dim() != 1) return;
    DualPotential trial = g;
    for (int round = 0; round < 3; ++round) {
      std::vector<double> w = softmax_weights(trial, lambda);
      Transport1d tp = transport_potential_1d(p_discrete, order_p, w, data, order_d);
      upper = std::min(upper,
                       kl_to_weights(w, data.weights()) / lambda + tp.w2sq);
      trial = std::move(tp.psi);
    }
    DualEval te = eval(trial);
    if (te.value > cur.value) {
      g = std::move(trial);
      cur = std::move(te);
    }
  };
  polish_1d();

  for (std::size_t it = 1; it <= max_iterations; ++it) {
    double grad_norm = 0.0, dir_norm_sq = 0.0;
    for (double d : cur.gradient) {
      grad_norm = std::max(grad_norm, std::abs(d));
      dir_norm_sq += d * d;
    }
    if (cur.value > best.value) {
      best.value = cur.value;
      best.g_star = g;
    }
    best.grad_inf_norm = grad_norm;
    best.duality_gap = upper - best.value;
    best.iterations = it;

    if (grad_norm <= tol || best.duality_gap <= tol) return best;

    // Backtracking ascent along the gradient while the region is smooth.
    bool moved = false;
    double t = step;
    for (int back = 0; back < 30; ++back) {
      DualPotential trial = g;
      for (std::size_t j = 0; j < n; ++j) trial[j] += t * cur.gradient[j];
      DualEval te = eval(trial);
      if (te.value > cur.value + 1e-4 * t * dir_norm_sq) {
        g = std::move(trial);
        cur = std::move(te);
        step = std::min(t * 2.0, 1e6);
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // Kink: Polyak subgradient step toward the primal upper bound.
      double gamma = (upper - cur.value + 0.05 * tol) / std::max(dir_norm_sq, 1e-300);
      for (std::size_t j = 0; j < n; ++j) g[j] += gamma * cur.gradient[j];
      cur = eval(g);
      step = std::max(0.25 * step, 1e-9);
    }
    if (it % 5 == 0 || !moved) tighten_upper(g, cur);
    if (it % 10 == 0) polish_1d();
  }

  if (best.duality_gap <= tol) return best;
  throw ConvergenceError("exact_dual_maximize did not reach tolerance " +
                             std::to_string(tol) + " within " +
                             std::to_string(max_iterations) + " iterations",
                         best);
}

double primal_bruteforce(const WeightedDiscreteMeasure& p_discrete, double lambda,
                         const WeightedDiscreteMeasure& data, double grid_step) {
  const std::size_t n = data.size();
  if (n > 3)
    throw std::length_error("primal_bruteforce supports at most 3 data atoms");
  if (!(grid_step > 0.0 && grid_step <= 1e-2 + 1e-15))
    throw std::invalid_argument("grid step must be positive and at most 1e-2");
  if (p_discrete.dim() != data.dim())
    throw std::invalid_argument("reference measure dimension does not match data");

  // Fixed cost matrix across all grid candidates.
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < p_discrete.size(); ++i)
    if (p_discrete.weights()[i] > 0.0) rows.push_back(i);
  std::vector<double> cost(rows.size() * n);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t j = 0; j < n; ++j)
      cost[r * n + j] = squared_distance(p_discrete.atom(rows[r]), data.atom(j));
  std::vector<double> supply(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) supply[r] = p_discrete.weights()[rows[r]];

  auto candidate_value = [&](const std::vector<double>& w) {
    double kl = kl_to_weights(w, data.weights());
    std::vector<double> demand;
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < n; ++j)
      if (w[j] > 0.0) {
        demand.push_back(w[j]);
        cols.push_back(j);
      }
    std::vector<double> sub(rows.size() * cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t k = 0; k < cols.size(); ++k)
        sub[r * cols.size() + k] = cost[r * n + cols[k]];
    return kl / lambda + detail::transport_cost(supply, std::move(demand), std::move(sub));
  };

  auto steps = static_cast<std::size_t>(std::llround(1.0 / grid_step));
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    best = candidate_value(w);
  } else if (n == 2) {
    for (std::size_t k = 0; k <= steps; ++k) {
      w[0] = static_cast<double>(k) / static_cast<double>(steps);
      w[1] = 1.0 - w[0];
      best = std::min(best, candidate_value(w));
    }
  } else {
    for (std::size_t k1 = 0; k1 <= steps; ++k1) {
      for (std::size_t k2 = 0; k2 + k1 <= steps; ++k2) {
        w[0] = static_cast<double>(k1) / static_cast<double>(steps);
        w[1] = static_cast<double>(k2) / static_cast<double>(steps);
        w[2] = std::max(1.0 - w[0] - w[1], 0.0);
        best = std::min(best, candidate_value(w));
      }
    }
  }
  return best;
}

}  // namespace bmrsw
