#include "bmrsw/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <thread>

#include "bmrsw/bootstrap.hpp"
#include "bmrsw/lambda_select.hpp"
#include "bmrsw/mmd.hpp"
#include "bmrsw/rsw.hpp"

namespace bmrsw::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

BootstrapConfig make_bootstrap_config(const RunConfig& config, const SimulatorSpec& spec,
                                      double lambda) {
  BootstrapConfig bc;
  bc.replicates = config.bootstrap.replicates;
  bc.lambda = lambda;
  bc.sga.iterations = config.sga.iterations;
  bc.sga.learning_rate_scale = config.sga.learning_rate_scale;
  bc.sga.burn_in_fraction = config.sga.burn_in_fraction;
  bc.sga.lambda = lambda;
  bc.cmaes.population = config.cmaes.population;
  bc.cmaes.rounds = config.cmaes.rounds;
  bc.cmaes.sigma0 = config.cmaes.sigma0;
  bc.cmaes.lower = spec.param_lower;
  bc.cmaes.upper = spec.param_upper;
  bc.cmaes.theta0 = config.simulator.initial_theta();
  bc.master_seed = config.master_seed;
  bc.parallelism = effective_workers(config);
  return bc;
}

std::vector<double> read_sample_column(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open sample file " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::string first = line.substr(0, line.find(','));
    values.push_back(std::stod(first));
  }
  if (values.empty()) throw std::invalid_argument("sample file " + path + " is empty");
  return values;
}

}  // namespace

RunConfig resolve_config(const std::string& config_path, const Overrides& overrides) {
  RunConfig config = RunConfig::load(config_path);
  if (const char* env = std::getenv("BMRSW_SEED"))
    config.master_seed = std::strtoull(env, nullptr, 10);
  if (const char* env = std::getenv("BMRSW_WORKERS"))
    config.workers = static_cast<int>(std::strtol(env, nullptr, 10));
  if (overrides.seed) config.master_seed = *overrides.seed;
  if (overrides.workers) config.workers = *overrides.workers;
  if (overrides.out_dir) config.output_dir = *overrides.out_dir;
  if (overrides.lambda) {
    if (*overrides.lambda == "auto")
      config.lambda = std::nullopt;
    else
      config.lambda = std::stod(*overrides.lambda);
  }
  return config;
}

int effective_workers(const RunConfig& config) {
  if (config.workers > 0) return config.workers;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

WeightedDiscreteMeasure load_dataset(const RunConfig& config) {
  if (config.dataset.generate.has_value()) {
    const auto& g = *config.dataset.generate;
    SimulatorSpec clean = g.simulator.build();
    return generate_dataset(clean, g.theta_star, g.contamination.build(), g.n, g.seed);
  }
  if (config.dataset.csv_path.empty())
    throw std::invalid_argument("config has neither dataset.generate nor dataset.csv");
  return WeightedDiscreteMeasure::load_csv(config.dataset.csv_path);
}

double resolve_lambda(const RunConfig& config) {
  if (config.lambda.has_value()) {
    if (!(*config.lambda > 0.0))
      throw std::invalid_argument("lambda must be positive");
    return *config.lambda;
  }
  fs::path manifest = fs::path(config.output_dir) / "selection_manifest.json";
  std::ifstream is(manifest);
  if (!is)
    throw std::runtime_error("--lambda auto needs a prior lambda-select run; missing " +
                             manifest.string());
  json j;
  is >> j;
  if (j.contains("suggested_lambda") && !j.at("suggested_lambda").is_null())
    return j.at("suggested_lambda").get<double>();
  std::cerr << "no elbow recorded; applying the lambda = 0 policy (lambda = 0.001)\n";
  return 1e-3;
}

int cmd_simulate(const RunConfig& config) {
  if (!config.dataset.generate.has_value())
    throw std::invalid_argument("simulate requires a dataset.generate block");
  fs::create_directories(config.output_dir);
  WeightedDiscreteMeasure data = load_dataset(config);
  fs::path csv = fs::path(config.output_dir) / "dataset.csv";
  data.save_csv(csv.string());

  const auto& g = *config.dataset.generate;
  json manifest = {{"created_utc", timestamp_utc()},
                   {"simulator", g.simulator.name},
                   {"theta_star", g.theta_star},
                   {"n", g.n},
                   {"seed", g.seed},
                   {"contamination",
                    {{"epsilon", g.contamination.epsilon},
                     {"rho", g.contamination.rho},
                     {"dirac", g.contamination.dirac}}}};
  write_json(fs::path(config.output_dir) / "dataset_manifest.json", manifest);
  std::cout << "wrote " << csv.string() << " (" << data.size() << " atoms)\n";
  return 0;
}

int cmd_rsw_eval(const RunConfig& config, const std::vector<double>& theta,
                 std::size_t top_k) {
  WeightedDiscreteMeasure data = load_dataset(config);
  SimulatorSpec spec = config.simulator.build();
  spec.validate_theta(theta);
  double lambda = resolve_lambda(config);

  NoiseBank bank = NoiseBank::generate(
      derive_seed(config.master_seed, 0, StreamPurpose::NoiseBank),
      config.sga.iterations, spec.noise_dim);
  SgaConfig sga;
  sga.iterations = config.sga.iterations;
  sga.learning_rate_scale = config.sga.learning_rate_scale;
  sga.burn_in_fraction = config.sga.burn_in_fraction;
  sga.lambda = lambda;
  SgaResult result = sga_estimate(data, simulate_batch(spec, theta, bank), sga);

  WeightedDiscreteMeasure reweighted = extract_reweighting(result.final_potential, lambda, data);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return reweighted.weights()[a] < reweighted.weights()[b];
  });
  json lowest = json::array();
  for (std::size_t r = 0; r < std::min(top_k, data.size()); ++r) {
    auto a = data.atom(order[r]);
    lowest.push_back({{"index", order[r]},
                      {"atom", std::vector<double>(a.begin(), a.end())},
                      {"weight", reweighted.weights()[order[r]]}});
  }
  auto [gmin, gmax] =
      std::minmax_element(result.final_potential.begin(), result.final_potential.end());
  double gmean = std::accumulate(result.final_potential.begin(),
                                 result.final_potential.end(), 0.0) /
                 static_cast<double>(result.final_potential.size());
  json report = {{"lambda", lambda},
                 {"theta", theta},
                 {"estimate", result.estimate},
                 {"potential", {{"min", *gmin}, {"max", *gmax}, {"mean", gmean}}},
                 {"lowest_weight_atoms", lowest}};
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_lambda_select(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  WeightedDiscreteMeasure data = load_dataset(config);
  SimulatorSpec spec = config.simulator.build();
  LambdaGrid grid = config.lambda_selection.grid.empty()
                        ? LambdaGrid::default_grid()
                        : LambdaGrid(config.lambda_selection.grid);
  BootstrapConfig base = make_bootstrap_config(config, spec, grid.values.front());
  LambdaDiagnostic diag =
      run_selection(data, spec, grid, config.lambda_selection.m_prime, base);
  diag.suggestion = suggest_elbow(diag.lambdas, diag.medians,
                                  config.lambda_selection.gap_threshold,
                                  config.lambda_selection.min_decrease);

  std::ofstream csv(fs::path(config.output_dir) / "lambda_diagnostic.csv");
  diag.to_csv(csv);
  write_json(fs::path(config.output_dir) / "lambda_diagnostic.json", diag.to_json());
  json manifest = diag.to_json();
  manifest["created_utc"] = timestamp_utc();
  manifest["m_prime"] = config.lambda_selection.m_prime;
  write_json(fs::path(config.output_dir) / "selection_manifest.json", manifest);

  if (diag.suggestion.has_value())
    std::cout << "suggested lambda: " << *diag.suggestion << '\n';
  else
    std::cout << "no elbow -- lambda = 0 policy\n";
  return 0;
}

int cmd_bootstrap(const RunConfig& config) {
  fs::create_directories(config.output_dir);
  WeightedDiscreteMeasure data = load_dataset(config);
  SimulatorSpec spec = config.simulator.build();
  double lambda = resolve_lambda(config);
  BootstrapConfig bc = make_bootstrap_config(config, spec, lambda);

  BootstrapResult result = run_bootstrap(data, spec, bc);
  BootstrapSummary summary = summarize(result, config.bootstrap.alpha);

  std::ofstream csv(fs::path(config.output_dir) / "bootstrap_result.csv");
  result.to_csv(csv, spec.param_names);
  write_json(fs::path(config.output_dir) / "bootstrap_summary.json",
             summary.to_json(spec.param_names));

  std::ostringstream log;
  for (const auto& fit : result.fits) {
    log << "replicate " << fit.index << " ok loss=" << fit.loss << " theta=";
    for (double t : fit.theta) log << t << ' ';
    log << '\n';
  }
  for (const auto& f : result.failures)
    log << "replicate " << f.index << " FAILED: " << f.message << '\n';
  write_text(fs::path(config.output_dir) / "bootstrap_log.txt", log.str());

  json manifest = {{"created_utc", timestamp_utc()},
                   {"lambda", lambda},
                   {"replicates_requested", result.requested},
                   {"replicates_succeeded", result.fits.size()},
                   {"config", config.to_json()}};
  write_json(fs::path(config.output_dir) / "bootstrap_manifest.json", manifest);

  std::cout << summary.to_json(spec.param_names).dump(2) << '\n';
  return result.fits.size() * 10 >= static_cast<std::size_t>(result.requested) * 9 ? 0 : 1;
}

int cmd_mmd_limit(const RunConfig& config, const std::string& xs_path,
                  const std::string& ys_path, const std::vector<double>& sigmas) {
  std::vector<double> xs = read_sample_column(xs_path);
  std::vector<double> ys = read_sample_column(ys_path);
  std::vector<double> sig = sigmas.empty() ? std::vector<double>{10.0, 100.0, 1000.0}
                                           : sigmas;
  auto rows = large_bandwidth_limit_check(xs, ys, sig);

  fs::create_directories(config.output_dir);
  std::ofstream os(fs::path(config.output_dir) / "mmd_limit.csv");
  os << "sigma0,scaled_mmd_sq,target\n";
  char buf[96];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", row.sigma0, row.scaled_mmd_sq,
                  row.target);
    os << buf;
    std::cout << buf;
  }
  return 0;
}

int cmd_report(const RunConfig& config) {
  fs::path dir(config.output_dir);
  bool printed = false;
  std::ifstream sel(dir / "selection_manifest.json");
  if (sel) {
    json j;
    sel >> j;
    std::cout << "lambda selection: ";
    if (j.contains("suggested_lambda") && !j.at("suggested_lambda").is_null())
      std::cout << "suggested lambda = " << j.at("suggested_lambda").get<double>() << '\n';
    else
      std::cout << "no elbow (lambda = 0 policy)\n";
    printed = true;
  }
  std::ifstream sum(dir / "bootstrap_summary.json");
  if (sum) {
    json j;
    sum >> j;
    std::cout << "bootstrap summary (alpha = " << j.value("alpha", 0.05) << "):\n";
    for (const auto& p : j.at("parameters"))
      std::printf("  %-8s median %12.6g   interval [%12.6g, %12.6g]   width %12.6g\n",
                  p.at("name").get<std::string>().c_str(), p.at("median").get<double>(),
                  p.at("lower").get<double>(), p.at("upper").get<double>(),
                  p.at("width").get<double>());
    printed = true;
  }
  if (!printed) {
    std::cout << "no results found in " << config.output_dir << '\n';
    return 1;
  }
  return 0;
}

}  // namespace bmrsw::cli
