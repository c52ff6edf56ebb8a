#include "bmrsw/simulators.hpp"

#include <cmath>
#include <stdexcept>

namespace bmrsw {

void SimulatorSpec::validate_theta(std::span<const double> theta) const {
  if (theta.size() != static_cast<std::size_t>(param_dim))
    throw std::invalid_argument("theta has dimension " + std::to_string(theta.size()) +
                                ", simulator '" + name + "' expects " +
                                std::to_string(param_dim));
  for (int k = 0; k < param_dim; ++k)
    if (!(theta[k] >= param_lower[k] && theta[k] <= param_upper[k]))
      throw std::invalid_argument("theta[" + std::to_string(k) + "] = " +
                                  std::to_string(theta[k]) + " outside bounds of '" +
                                  name + "'");
}

bool SimulatorSpec::theta_in_bounds(std::span<const double> theta) const {
  if (theta.size() != static_cast<std::size_t>(param_dim)) return false;
  for (int k = 0; k < param_dim; ++k)
    if (!(theta[k] >= param_lower[k] && theta[k] <= param_upper[k])) return false;
  return true;
}

double gandk_transform(double a, double b, double g, double k, double z) {
  double skew = 1.0 + 0.8 * std::tanh(0.5 * g * z);
  double kurt = z * std::pow(1.0 + z * z, k);
  return a + b * skew * kurt;
}

double normal_transform(double mu, double sigma, double z) { return mu + sigma * z; }

double student_t_sample(double nu, Rng& rng) {
  if (!(nu > 0.0)) throw std::invalid_argument("degrees of freedom must be positive");
  double z = rng.normal();
  double v = rng.chi_squared(nu);
  return z / std::sqrt(v / nu);
}

double discretize(double x, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("discretization width must be positive");
  return std::floor(x / rho) * rho;
}

SimulatorSpec SimulatorSpec::normal() {
  SimulatorSpec spec;
  spec.name = "normal";
  spec.param_dim = 2;
  spec.param_lower = {-10.0, 0.10};
  spec.param_upper = {10.0, 20.0};
  spec.param_names = {"mu", "sigma"};
  spec.noise_dim = 1;
  spec.output_dim = 1;
  spec.transform = [](std::span<const double> theta, std::span<const double> z,
                      std::span<double> out) {
    out[0] = normal_transform(theta[0], theta[1], z[0]);
  };
  return spec;
}

SimulatorSpec SimulatorSpec::gandk() {
  SimulatorSpec spec;
  spec.name = "gandk";
  spec.param_dim = 4;
  spec.param_lower = {-10.0, 0.1, 0.03, 0.05};
  spec.param_upper = {10.0, 10.0, 40.0, 3.0};
  spec.param_names = {"a", "b", "g", "k"};
  spec.noise_dim = 1;
  spec.output_dim = 1;
  spec.transform = [](std::span<const double> theta, std::span<const double> z,
                      std::span<double> out) {
    out[0] = gandk_transform(theta[0], theta[1], theta[2], theta[3], z[0]);
  };
  return spec;
}

SimulatorSpec SimulatorSpec::student_t(int nu) {
  if (nu < 1) throw std::invalid_argument("student_t simulator needs integer nu >= 1");
  SimulatorSpec spec;
  spec.name = "student_t";
  spec.param_dim = 1;
  spec.param_lower = {1.0};
  spec.param_upper = {1000.0};
  spec.param_names = {"nu"};
  spec.noise_dim = nu + 1;  // one numerator normal plus nu chi-squared normals
  spec.output_dim = 1;
  spec.transform = [nu](std::span<const double> theta, std::span<const double> z,
                        std::span<double> out) {
    if (static_cast<int>(std::llround(theta[0])) != nu)
      throw std::invalid_argument("student_t spec was built for nu = " + std::to_string(nu));
    double chi_sq = 0.0;
    for (int i = 1; i <= nu; ++i) chi_sq += z[i] * z[i];
    out[0] = z[0] / std::sqrt(chi_sq / static_cast<double>(nu));
  };
  return spec;
}

SimulatorSpec SimulatorSpec::by_name(const std::string& name) {
  if (name == "normal") return normal();
  if (name == "gandk") return gandk();
  if (name == "student_t") return student_t(22);
  throw std::invalid_argument("unknown simulator '" + name +
                              "' (expected normal, gandk or student_t)");
}

NoiseBank NoiseBank::generate(std::uint64_t seed, std::size_t count, int dim) {
  if (count == 0 || dim <= 0)
    throw std::invalid_argument("noise bank needs positive count and dimension");
  NoiseBank bank;
  bank.seed = seed;
  bank.count = count;
  bank.dim = dim;
  bank.draws.resize(count * static_cast<std::size_t>(dim));
  Rng rng(seed);
  for (double& x : bank.draws) x = rng.normal();
  return bank;
}

void ContaminationSpec::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("contamination epsilon must lie in [0, 1]");
  if (!(rho >= 0.0)) throw std::invalid_argument("contamination rho must be >= 0");
  if (epsilon > 0.0 && dirac.empty() && !simulator.has_value())
    throw std::invalid_argument("contamination with epsilon > 0 needs a dirac location "
                                "or a nested simulator");
  if (simulator.has_value() &&
      simulator_theta.size() != static_cast<std::size_t>(simulator->param_dim))
    throw std::invalid_argument("nested contaminant simulator theta has wrong dimension");
}

WeightedDiscreteMeasure generate_dataset(const SimulatorSpec& clean,
                                         std::span<const double> theta_star,
                                         const ContaminationSpec& contamination,
                                         std::size_t n, std::uint64_t seed) {
  clean.validate_theta(theta_star);
  contamination.validate();
  if (n < 1) throw std::invalid_argument("dataset size must be at least 1");
  const int m = clean.output_dim;
  if (!contamination.dirac.empty() &&
      contamination.dirac.size() != static_cast<std::size_t>(m))
    throw std::invalid_argument("dirac contaminant dimension does not match the model");
  if (contamination.simulator.has_value() && contamination.simulator->output_dim != m)
    throw std::invalid_argument("contaminant simulator output dimension mismatch");

  Rng model_rng(derive_seed(seed, 0, StreamPurpose::ModelNoise));
  Rng contam_rng(derive_seed(seed, 0, StreamPurpose::Contamination));

  std::vector<double> atoms(n * static_cast<std::size_t>(m));
  std::vector<double> z(clean.noise_dim);
  std::vector<double> zc;
  if (contamination.simulator.has_value())
    zc.resize(contamination.simulator->noise_dim);

  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> out(atoms.data() + i * static_cast<std::size_t>(m),
                          static_cast<std::size_t>(m));
    bool contaminated =
        contamination.epsilon > 0.0 && contam_rng.bernoulli(contamination.epsilon);
    if (contaminated) {
      if (!contamination.dirac.empty()) {
        std::copy(contamination.dirac.begin(), contamination.dirac.end(), out.begin());
      } else {
        for (double& x : zc) x = contam_rng.normal();
        contamination.simulator->transform(contamination.simulator_theta, zc, out);
      }
    } else {
      for (double& x : z) x = model_rng.normal();
      clean.transform(theta_star, z, out);
      if (contamination.rho > 0.0)
        for (double& x : out) x = discretize(x, contamination.rho);
    }
  }
  return WeightedDiscreteMeasure::uniform(std::move(atoms), m);
}

PointSet simulate_batch(const SimulatorSpec& spec, std::span<const double> theta,
                        const NoiseBank& bank) {
  spec.validate_theta(theta);
  if (bank.dim != spec.noise_dim)
    throw std::invalid_argument("noise bank dimension does not match the simulator");
  PointSet out;
  out.dim = spec.output_dim;
  out.values.resize(bank.count * static_cast<std::size_t>(spec.output_dim));
  for (std::size_t i = 0; i < bank.count; ++i) {
    std::span<double> o(out.values.data() + i * static_cast<std::size_t>(spec.output_dim),
                        static_cast<std::size_t>(spec.output_dim));
    spec.transform(theta, bank.draw(i), o);
  }
  return out;
}

}  // namespace bmrsw
