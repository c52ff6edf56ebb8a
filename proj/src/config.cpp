#include "bmrsw/config.hpp"

#include <fstream>

namespace bmrsw {

using nlohmann::json;

SimulatorSpec SimulatorConfig::build() const {
  SimulatorSpec spec = name == "student_t" ? SimulatorSpec::student_t(student_t_nu)
                                           : SimulatorSpec::by_name(name);
  if (!lower.empty()) {
    if (lower.size() != static_cast<std::size_t>(spec.param_dim))
      throw std::invalid_argument("simulator lower bounds have wrong dimension");
    spec.param_lower = lower;
  }
  if (!upper.empty()) {
    if (upper.size() != static_cast<std::size_t>(spec.param_dim))
      throw std::invalid_argument("simulator upper bounds have wrong dimension");
    spec.param_upper = upper;
  }
  return spec;
}

std::vector<double> SimulatorConfig::initial_theta() const {
  if (!theta0.empty()) return theta0;
  if (name == "normal") return {-5.0, 0.15};
  if (name == "gandk") return {5.0, 0.15, 0.05, 0.05};
  if (name == "student_t") return {static_cast<double>(student_t_nu)};
  throw std::invalid_argument("no default initial theta for simulator '" + name + "'");
}

ContaminationSpec ContaminationConfig::build() const {
  ContaminationSpec spec;
  spec.epsilon = epsilon;
  spec.rho = rho;
  spec.dirac = dirac;
  if (simulator.has_value()) {
    spec.simulator = simulator->build();
    spec.simulator_theta = simulator_theta;
  }
  spec.validate();
  return spec;
}

namespace {

json simulator_to_json(const SimulatorConfig& c) {
  json j = {{"name", c.name}};
  if (c.name == "student_t") j["nu"] = c.student_t_nu;
  if (!c.lower.empty()) j["lower"] = c.lower;
  if (!c.upper.empty()) j["upper"] = c.upper;
  if (!c.theta0.empty()) j["theta0"] = c.theta0;
  return j;
}

SimulatorConfig simulator_from_json(const json& j) {
  SimulatorConfig c;
  if (j.is_string()) {
    c.name = j.get<std::string>();
    return c;
  }
  c.name = j.value("name", c.name);
  c.student_t_nu = j.value("nu", c.student_t_nu);
  c.lower = j.value("lower", c.lower);
  c.upper = j.value("upper", c.upper);
  c.theta0 = j.value("theta0", c.theta0);
  return c;
}

}  // namespace

json RunConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["simulator"] = simulator_to_json(simulator);

  json ds;
  if (dataset.generate.has_value()) {
    const auto& g = *dataset.generate;
    json gen;
    gen["simulator"] = simulator_to_json(g.simulator);
    gen["theta_star"] = g.theta_star;
    json cont = {{"epsilon", g.contamination.epsilon}, {"rho", g.contamination.rho}};
    if (!g.contamination.dirac.empty()) {
      if (g.contamination.dirac.size() == 1)
        cont["dirac"] = g.contamination.dirac[0];
      else
        cont["dirac"] = g.contamination.dirac;
    }
    if (g.contamination.simulator.has_value()) {
      cont["simulator"] = simulator_to_json(*g.contamination.simulator);
      cont["theta"] = g.contamination.simulator_theta;
    }
    gen["contamination"] = cont;
    gen["n"] = g.n;
    gen["seed"] = g.seed;
    ds["generate"] = gen;
  } else {
    ds["csv"] = dataset.csv_path;
  }
  j["dataset"] = ds;

  if (lambda.has_value())
    j["lambda"] = *lambda;
  else
    j["lambda"] = "auto";

  j["sga"] = {{"iterations", sga.iterations},
              {"learning_rate_scale", sga.learning_rate_scale},
              {"burn_in_fraction", sga.burn_in_fraction},
              {"record_trace", sga.record_trace}};
  j["cmaes"] = {{"population", cmaes.population},
                {"rounds", cmaes.rounds},
                {"sigma0", cmaes.sigma0}};
  j["bootstrap"] = {{"replicates", bootstrap.replicates}, {"alpha", bootstrap.alpha}};
  json sel = {{"m_prime", lambda_selection.m_prime},
              {"gap_threshold", lambda_selection.gap_threshold},
              {"min_decrease", lambda_selection.min_decrease},
              {"subsample_cap", lambda_selection.subsample_cap}};
  if (!lambda_selection.grid.empty()) sel["grid"] = lambda_selection.grid;
  j["lambda_selection"] = sel;
  j["master_seed"] = master_seed;
  j["output_dir"] = output_dir;
  j["workers"] = workers;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.schema_version = j.value("schema_version", c.schema_version);
  if (c.schema_version != 1)
    throw std::invalid_argument("unsupported config schema version " +
                                std::to_string(c.schema_version));
  if (j.contains("simulator")) c.simulator = simulator_from_json(j.at("simulator"));

  if (j.contains("dataset")) {
    const json& ds = j.at("dataset");
    if (ds.contains("generate")) {
      const json& gen = ds.at("generate");
      GenerateConfig g;
      if (gen.contains("simulator")) g.simulator = simulator_from_json(gen.at("simulator"));
      g.theta_star = gen.value("theta_star", g.theta_star);
      if (gen.contains("contamination")) {
        const json& cont = gen.at("contamination");
        g.contamination.epsilon = cont.value("epsilon", 0.0);
        g.contamination.rho = cont.value("rho", 0.0);
        if (cont.contains("dirac")) {
          if (cont.at("dirac").is_number())
            g.contamination.dirac = {cont.at("dirac").get<double>()};
          else
            g.contamination.dirac = cont.at("dirac").get<std::vector<double>>();
        }
        if (cont.contains("simulator")) {
          g.contamination.simulator = simulator_from_json(cont.at("simulator"));
          g.contamination.simulator_theta =
              cont.value("theta", g.contamination.simulator_theta);
        }
      }
      g.n = gen.value("n", g.n);
      g.seed = gen.value("seed", g.seed);
      c.dataset.generate = std::move(g);
    } else if (ds.contains("csv")) {
      c.dataset.csv_path = ds.at("csv").get<std::string>();
    }
  }

  if (j.contains("lambda")) {
    const json& lam = j.at("lambda");
    if (lam.is_string()) {
      if (lam.get<std::string>() != "auto")
        throw std::invalid_argument("lambda must be a positive number or \"auto\"");
      c.lambda = std::nullopt;
    } else {
      c.lambda = lam.get<double>();
    }
  }

  if (j.contains("sga")) {
    const json& s = j.at("sga");
    c.sga.iterations = s.value("iterations", c.sga.iterations);
    c.sga.learning_rate_scale = s.value("learning_rate_scale", c.sga.learning_rate_scale);
    c.sga.burn_in_fraction = s.value("burn_in_fraction", c.sga.burn_in_fraction);
    c.sga.record_trace = s.value("record_trace", c.sga.record_trace);
  }
  if (j.contains("cmaes")) {
    const json& s = j.at("cmaes");
    c.cmaes.population = s.value("population", c.cmaes.population);
    c.cmaes.rounds = s.value("rounds", c.cmaes.rounds);
    c.cmaes.sigma0 = s.value("sigma0", c.cmaes.sigma0);
  }
  if (j.contains("bootstrap")) {
    const json& s = j.at("bootstrap");
    c.bootstrap.replicates = s.value("replicates", c.bootstrap.replicates);
    c.bootstrap.alpha = s.value("alpha", c.bootstrap.alpha);
  }
  if (j.contains("lambda_selection")) {
    const json& s = j.at("lambda_selection");
    c.lambda_selection.m_prime = s.value("m_prime", c.lambda_selection.m_prime);
    c.lambda_selection.grid = s.value("grid", c.lambda_selection.grid);
    c.lambda_selection.gap_threshold =
        s.value("gap_threshold", c.lambda_selection.gap_threshold);
    c.lambda_selection.min_decrease =
        s.value("min_decrease", c.lambda_selection.min_decrease);
    c.lambda_selection.subsample_cap =
        s.value("subsample_cap", c.lambda_selection.subsample_cap);
  }
  c.master_seed = j.value("master_seed", c.master_seed);
  c.output_dir = j.value("output_dir", c.output_dir);
  c.workers = j.value("workers", c.workers);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path);
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << to_json().dump(2) << '\n';
}

}  // namespace bmrsw
