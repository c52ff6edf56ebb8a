#include "bmrsw/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "bmrsw/parallel.hpp"

namespace bmrsw {

void CmaEsConfig::validate() const {
  if (population < 4) throw std::invalid_argument("CMA-ES population must be at least 4");
  if (rounds < 1) throw std::invalid_argument("CMA-ES needs at least one round");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("initial step size must be positive");
  const std::size_t d = theta0.size();
  if (d == 0) throw std::invalid_argument("theta0 must be non-empty");
  if (lower.size() != d || upper.size() != d)
    throw std::invalid_argument("bound vectors must match theta0 dimension");
  for (std::size_t k = 0; k < d; ++k) {
    if (!(lower[k] < upper[k]))
      throw std::invalid_argument("lower bound must be strictly below upper bound");
    if (!(theta0[k] >= lower[k] && theta0[k] <= upper[k]))
      throw std::invalid_argument("theta0 must lie within the bounds");
  }
}

nlohmann::json CmaEsReport::to_json() const {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& r : history)
    rounds.push_back({{"round", r.round},
                      {"best_value", r.best_value},
                      {"sigma", r.sigma},
                      {"mean", r.mean}});
  return {{"best_theta", best_theta},
          {"best_value", best_value},
          {"non_finite_evaluations", non_finite_evaluations},
          {"covariance_resets", covariance_resets},
          {"rounds", rounds}};
}

void CmaEsReport::history_to_csv(std::ostream& os) const {
  os << "round,best_value,sigma";
  if (!history.empty())
    for (std::size_t k = 0; k < history.front().mean.size(); ++k) os << ",mean_" << k;
  os << '\n';
  char buf[64];
  for (const auto& r : history) {
    os << r.round;
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", r.best_value, r.sigma);
    os << buf;
    for (double m : r.mean) {
      std::snprintf(buf, sizeof(buf), ",%.17g", m);
      os << buf;
    }
    os << '\n';
  }
}

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Matrix as_matrix(const std::vector<double>& flat, int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = flat[static_cast<std::size_t>(i) * d + j];
  return m;
}

std::vector<double> as_flat(const Matrix& m) {
  std::vector<double> flat(static_cast<std::size_t>(m.rows()) * m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) flat[static_cast<std::size_t>(i) * m.cols() + j] = m(i, j);
  return flat;
}

}  // namespace

CmaEs::CmaEs(CmaEsConfig config) : cfg_(std::move(config)) {
  cfg_.validate();
  dim_ = cfg_.dim();
  const double d = static_cast<double>(dim_);
  const int k = cfg_.population;

  mu_ = k / 2;
  weights_.resize(mu_);
  for (int i = 0; i < mu_; ++i)
    weights_[i] = std::log(static_cast<double>(mu_) + 0.5) -
                  std::log(static_cast<double>(i) + 1.0);
  double wsum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (double& w : weights_) w /= wsum;
  double wsq = 0.0;
  for (double w : weights_) wsq += w * w;
  mu_eff_ = 1.0 / wsq;

  c_sigma_ = (mu_eff_ + 2.0) / (d + mu_eff_ + 5.0);
  d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff_ - 1.0) / (d + 1.0)) - 1.0) +
             c_sigma_;
  c_c_ = (4.0 + mu_eff_ / d) / (d + 4.0 + 2.0 * mu_eff_ / d);
  c_1_ = 2.0 / ((d + 1.3) * (d + 1.3) + mu_eff_);
  c_mu_ = std::min(1.0 - c_1_, 2.0 * (mu_eff_ - 2.0 + 1.0 / mu_eff_) /
                                   ((d + 2.0) * (d + 2.0) + mu_eff_));
  chi_n_ = std::sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d));

  mean_ = cfg_.theta0;
  sigma_ = cfg_.sigma0;
  p_sigma_.assign(dim_, 0.0);
  p_c_.assign(dim_, 0.0);
  cov_ = as_flat(Matrix::Identity(dim_, dim_));
  decompose();
}

void CmaEs::decompose() {
  Matrix c = as_matrix(cov_, dim_);
  c = 0.5 * (c + c.transpose());  // keep symmetric against drift
  Eigen::SelfAdjointEigenSolver<Matrix> solver(c);
  bool ok = solver.info() == Eigen::Success;
  Vector evals;
  if (ok) {
    evals = solver.eigenvalues();
    for (int i = 0; i < dim_; ++i)
      if (!(evals(i) > 0.0) || !std::isfinite(evals(i))) ok = false;
  }
  if (!ok) {
    ++covariance_resets_;
    cov_ = as_flat(Matrix::Identity(dim_, dim_));
    eig_basis_ = cov_;
    eig_scale_.assign(dim_, 1.0);
    return;
  }
  eig_basis_ = as_flat(solver.eigenvectors());
  eig_scale_.resize(dim_);
  for (int i = 0; i < dim_; ++i) eig_scale_[i] = std::sqrt(evals(i));
}

CmaEs::Generation CmaEs::sample_generation(Rng& rng) {
  Generation gen;
  gen.candidates.resize(cfg_.population);
  gen.steps.resize(cfg_.population);
  gen.penalties.assign(cfg_.population, 0.0);

  Matrix basis = as_matrix(eig_basis_, dim_);
  Vector scale(dim_);
  for (int i = 0; i < dim_; ++i) scale(i) = eig_scale_[i];

  for (int k = 0; k < cfg_.population; ++k) {
    Vector y(dim_), x(dim_);
    bool in_bounds = false;
    for (int attempt = 0; attempt < 10 && !in_bounds; ++attempt) {
      Vector z(dim_);
      for (int i = 0; i < dim_; ++i) z(i) = rng.normal();
      y = basis * (scale.asDiagonal() * z);
      in_bounds = true;
      for (int i = 0; i < dim_; ++i) {
        x(i) = mean_[i] + sigma_ * y(i);
        if (x(i) < cfg_.lower[i] || x(i) > cfg_.upper[i]) in_bounds = false;
      }
    }
    gen.steps[k].assign(y.data(), y.data() + dim_);
    std::vector<double> cand(dim_);
    double dist_sq = 0.0;
    for (int i = 0; i < dim_; ++i) {
      double xi = mean_[i] + sigma_ * y(i);
      double clipped = std::clamp(xi, cfg_.lower[i], cfg_.upper[i]);
      dist_sq += (xi - clipped) * (xi - clipped);
      cand[i] = clipped;
    }
    if (!in_bounds) gen.penalties[k] = dist_sq / (sigma_ * sigma_);
    gen.candidates[k] = std::move(cand);
  }
  return gen;
}

void CmaEs::update(const Generation& gen, const std::vector<double>& fitness) {
  const int k = cfg_.population;
  if (static_cast<int>(fitness.size()) != k)
    throw std::invalid_argument("fitness vector size must equal the population");
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fitness[a] < fitness[b]; });

  Vector yw = Vector::Zero(dim_);
  for (int i = 0; i < mu_; ++i) {
    const auto& y = gen.steps[order[i]];
    for (int j = 0; j < dim_; ++j) yw(j) += weights_[i] * y[j];
  }
  for (int j = 0; j < dim_; ++j) mean_[j] += sigma_ * yw(j);

  // C^{-1/2} yw through the eigendecomposition.
  Matrix basis = as_matrix(eig_basis_, dim_);
  Vector inv_scale(dim_);
  for (int i = 0; i < dim_; ++i) inv_scale(i) = 1.0 / eig_scale_[i];
  Vector c_inv_sqrt_yw = basis * (inv_scale.asDiagonal() * (basis.transpose() * yw));

  double ps_decay = 1.0 - c_sigma_;
  double ps_input = std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mu_eff_);
  for (int j = 0; j < dim_; ++j)
    p_sigma_[j] = ps_decay * p_sigma_[j] + ps_input * c_inv_sqrt_yw(j);
  double ps_norm = 0.0;
  for (double v : p_sigma_) ps_norm += v * v;
  ps_norm = std::sqrt(ps_norm);

  ++generation_;
  double expected = std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * generation_));
  bool h_sigma = ps_norm / expected < (1.4 + 2.0 / (dim_ + 1.0)) * chi_n_;

  double pc_decay = 1.0 - c_c_;
  double pc_input = h_sigma ? std::sqrt(c_c_ * (2.0 - c_c_) * mu_eff_) : 0.0;
  for (int j = 0; j < dim_; ++j) p_c_[j] = pc_decay * p_c_[j] + pc_input * yw(j);

  Matrix c = as_matrix(cov_, dim_);
  Vector pc(dim_);
  for (int j = 0; j < dim_; ++j) pc(j) = p_c_[j];
  double delta_h = (1.0 - (h_sigma ? 1.0 : 0.0)) * c_c_ * (2.0 - c_c_);
  Matrix rank_mu = Matrix::Zero(dim_, dim_);
  for (int i = 0; i < mu_; ++i) {
    Vector y(dim_);
    const auto& ys = gen.steps[order[i]];
    for (int j = 0; j < dim_; ++j) y(j) = ys[j];
    rank_mu += weights_[i] * (y * y.transpose());
  }
  c = (1.0 - c_1_ - c_mu_) * c + c_1_ * (pc * pc.transpose() + delta_h * c) +
      c_mu_ * rank_mu;
  cov_ = as_flat(c);

  sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));
  if (!std::isfinite(sigma_) || sigma_ <= 0.0) sigma_ = cfg_.sigma0;
  decompose();
}

std::vector<double> CmaEs::covariance() const { return cov_; }

CmaEsReport cma_es_minimize(const Objective& objective, const CmaEsConfig& config,
                            int eval_workers) {
  CmaEs state(config);
  Rng rng(config.seed);
  CmaEsReport report;
  report.best_value = std::numeric_limits<double>::infinity();
  report.history.reserve(config.rounds);

  for (int round = 1; round <= config.rounds; ++round) {
    auto gen = state.sample_generation(rng);
    const int k = config.population;
    std::vector<double> raw(k);
    parallel_for(static_cast<std::size_t>(k), eval_workers,
                 [&](std::size_t i) { raw[i] = objective(gen.candidates[i]); });

    std::vector<double> fitness(k);
    int finite_count = 0;
    for (int i = 0; i < k; ++i) {
      if (std::isfinite(raw[i])) {
        ++finite_count;
        fitness[i] = raw[i] + gen.penalties[i];
        if (raw[i] < report.best_value) {
          report.best_value = raw[i];
          report.best_theta = gen.candidates[i];
        }
      } else {
        ++report.non_finite_evaluations;
        fitness[i] = std::numeric_limits<double>::infinity();
      }
    }
    if (finite_count == 0)
      throw std::runtime_error("CMA-ES: every candidate in round " +
                               std::to_string(round) + " evaluated non-finite");

    state.update(gen, fitness);
    report.history.push_back({round, report.best_value, state.sigma(), state.mean()});
  }
  report.covariance_resets = state.covariance_resets();
  return report;
}

}  // namespace bmrsw
