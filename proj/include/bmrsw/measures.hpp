#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace bmrsw {

/// Thrown when a KL evaluation meets q_j > 0 where p_j = 0. Callers in this
/// pipeline satisfy absolute continuity by construction, so this signals a bug
/// rather than an infinite divergence.
class AbsoluteContinuityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An ordered batch of points in R^m, stored row-major. Used for simulator
/// output streams and as the sample side of semi-discrete evaluations.
struct PointSet {
  std::vector<double> values;  // size() * dim entries
  int dim = 1;

  std::size_t size() const {
    return dim > 0 ? values.size() / static_cast<std::size_t>(dim) : 0;
  }
  std::span<const double> point(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

/// Discrete probability measure: atoms in R^m plus a weight vector summing to
/// one. Duplicate atoms are allowed and treated as distinct (bootstrap
/// resamples produce them).
class WeightedDiscreteMeasure {
 public:
  WeightedDiscreteMeasure(std::vector<double> atoms, int dim,
                          std::vector<double> weights);

  /// Uniform 1/n weights on the given atoms.
  static WeightedDiscreteMeasure uniform(std::vector<double> atoms, int dim);

  std::size_t size() const { return weights_.size(); }
  int dim() const { return dim_; }
  std::span<const double> atom(std::size_t j) const {
    return {atoms_.data() + j * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  bool has_uniform_weights(double tol = 1e-12) const;

  /// Same atoms, new weights (validated).
  WeightedDiscreteMeasure with_weights(std::vector<double> weights) const;

  bool same_atoms(const WeightedDiscreteMeasure& other) const;

  // CSV: one atom per row, last column is the weight. JSON:
  // {"atoms": [[...], ...], "weights": [...]}.
  void to_csv(std::ostream& os) const;
  static WeightedDiscreteMeasure from_csv(std::istream& is);
  void save_csv(const std::string& path) const;
  static WeightedDiscreteMeasure load_csv(const std::string& path);
  nlohmann::json to_json() const;
  static WeightedDiscreteMeasure from_json(const nlohmann::json& j);

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
  int dim_;
};

/// Kantorovich-style dual potential over the data atoms, in units of squared
/// distance. Length always matches the atom count of the associated measure.
using DualPotential = std::vector<double>;

double squared_distance(std::span<const double> a, std::span<const double> b);

/// KL(q, p) between measures on a shared atom list, with 0 log 0 = 0.
double kl_discrete(const WeightedDiscreteMeasure& q,
                   const WeightedDiscreteMeasure& p);

/// Exact squared W2 between 1D measures via the monotone quantile coupling.
double w2sq_1d(const WeightedDiscreteMeasure& a,
               const WeightedDiscreteMeasure& b);

/// Exact squared W2 in any dimension via a transportation simplex solve.
/// Throws std::length_error when the combined atom count exceeds the cap;
/// callers should subsample.
double w2sq_discrete(const WeightedDiscreteMeasure& a,
                     const WeightedDiscreteMeasure& b,
                     std::size_t max_combined_atoms = 4096);

/// log sum_t exp(v_t), computed with a max shift.
double log_sum_exp(std::span<const double> v);

/// Squared diagonal of the atoms' bounding box; a cheap upper estimate of the
/// squared diameter D^2 used to scale learning rates.
double bounding_box_sq_diameter(const WeightedDiscreteMeasure& m);

/// w_j = exp(-lambda g_j) / sum_t exp(-lambda g_t), computed stably.
std::vector<double> softmax_weights(const DualPotential& g, double lambda);

}  // namespace bmrsw
