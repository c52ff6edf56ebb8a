#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmrsw/cmaes.hpp"
#include "bmrsw/rsw.hpp"
#include "bmrsw/simulators.hpp"

namespace bmrsw {

struct SimulatorConfig {
  std::string name = "normal";
  int student_t_nu = 22;
  std::vector<double> lower, upper, theta0;  // empty: use built-in defaults

  bool operator==(const SimulatorConfig&) const = default;
  SimulatorSpec build() const;
  std::vector<double> initial_theta() const;
};

struct ContaminationConfig {
  double epsilon = 0.0;
  double rho = 0.0;
  std::vector<double> dirac;
  std::optional<SimulatorConfig> simulator;
  std::vector<double> simulator_theta;

  bool operator==(const ContaminationConfig&) const = default;
  ContaminationSpec build() const;
};

struct GenerateConfig {
  SimulatorConfig simulator;
  std::vector<double> theta_star;
  ContaminationConfig contamination;
  std::uint64_t n = 1000;
  std::uint64_t seed = 1;

  bool operator==(const GenerateConfig&) const = default;
};

struct DatasetConfig {
  std::string csv_path;  // empty when generating
  std::optional<GenerateConfig> generate;

  bool operator==(const DatasetConfig&) const = default;
};

struct SgaBlock {
  std::uint64_t iterations = 20000;
  double learning_rate_scale = 1.0;
  double burn_in_fraction = 0.6;
  bool record_trace = false;

  bool operator==(const SgaBlock&) const = default;
};

struct CmaEsBlock {
  int population = 16;
  int rounds = 50;
  double sigma0 = 1.0;

  bool operator==(const CmaEsBlock&) const = default;
};

struct BootstrapBlock {
  int replicates = 100;
  double alpha = 0.05;

  bool operator==(const BootstrapBlock&) const = default;
};

struct LambdaSelectionBlock {
  int m_prime = 15;
  std::vector<double> grid;  // empty: default 15-point log grid
  double gap_threshold = 0.1;
  double min_decrease = 0.2;
  std::uint64_t subsample_cap = 2048;

  bool operator==(const LambdaSelectionBlock&) const = default;
};

/// Everything a run needs, in one versioned structure. Omitted fields take
/// the defaults above.
struct RunConfig {
  int schema_version = 1;
  SimulatorConfig simulator;
  DatasetConfig dataset;
  std::optional<double> lambda;  // nullopt = "auto"
  SgaBlock sga;
  CmaEsBlock cmaes;
  BootstrapBlock bootstrap;
  LambdaSelectionBlock lambda_selection;
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  int workers = 0;  // 0 = all logical cores

  bool operator==(const RunConfig&) const = default;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace bmrsw
