#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmrsw/measures.hpp"
#include "bmrsw/rng.hpp"

namespace bmrsw {

/// Deterministic simulator transform G(theta, z) plus its parameter-space
/// description. The reference measure is standard normal of dimension
/// noise_dim for all built-in specs.
struct SimulatorSpec {
  std::string name;
  int param_dim = 0;
  std::vector<double> param_lower, param_upper;
  std::vector<std::string> param_names;
  int noise_dim = 1;
  int output_dim = 1;
  std::function<void(std::span<const double> theta, std::span<const double> z,
                     std::span<double> out)>
      transform;

  void validate_theta(std::span<const double> theta) const;
  bool theta_in_bounds(std::span<const double> theta) const;

  /// Univariate normal, theta = (mu, sigma).
  static SimulatorSpec normal();
  /// g-and-k quantile transform, theta = (a, b, g, k).
  static SimulatorSpec gandk();
  /// Student-t with integer degrees of freedom via the normal / chi-squared
  /// ratio; data generation only, theta = (nu).
  static SimulatorSpec student_t(int nu);
  /// Lookup by config name: "normal", "gandk", "student_t".
  static SimulatorSpec by_name(const std::string& name);
};

/// Fixed set of reference-measure draws reused across every theta evaluation
/// (common random numbers). Regenerating with the same seed is bit-identical.
struct NoiseBank {
  std::uint64_t seed = 0;
  std::size_t count = 0;
  int dim = 1;
  std::vector<double> draws;  // count * dim, row-major

  static NoiseBank generate(std::uint64_t seed, std::size_t count, int dim);
  std::span<const double> draw(std::size_t i) const {
    return {draws.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

/// Huber mass contamination plus optional geometric discretization:
/// with probability epsilon a sample comes from the contaminant (a point mass
/// or a nested simulator draw); otherwise it is a model draw snapped to the
/// grid floor(x / rho) * rho when rho > 0.
struct ContaminationSpec {
  double epsilon = 0.0;
  double rho = 0.0;
  std::vector<double> dirac;  // point-mass location; empty if unused
  std::optional<SimulatorSpec> simulator;
  std::vector<double> simulator_theta;

  void validate() const;
};

double gandk_transform(double a, double b, double g, double k, double z);
double normal_transform(double mu, double sigma, double z);

/// One Student-t draw with nu degrees of freedom (normal over root
/// chi-squared/nu).
double student_t_sample(double nu, Rng& rng);

/// floor(x / rho) * rho.
double discretize(double x, double rho);

/// n contaminated draws as a uniform-weight empirical measure, deterministic
/// given the seed. Contaminant randomness runs on a stream independent of the
/// model noise.
WeightedDiscreteMeasure generate_dataset(const SimulatorSpec& clean,
                                         std::span<const double> theta_star,
                                         const ContaminationSpec& contamination,
                                         std::size_t n, std::uint64_t seed);

/// Applies the transform to every bank draw in order; same bank and theta
/// give identical output.
PointSet simulate_batch(const SimulatorSpec& spec, std::span<const double> theta,
                        const NoiseBank& bank);

}  // namespace bmrsw
