#include "bmrsw/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bmrsw {

namespace {

void validate_weights(const std::vector<double>& w) {
  if (w.empty()) throw std::invalid_argument("measure must have at least one atom");
  // Kahan summation: the 1e-12 budget is for the weights, not for naive
  // accumulation error over large n.
  double sum = 0.0, carry = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw std::invalid_argument("weights must be non-negative");
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("weights must sum to 1 (got " + std::to_string(sum) + ")");
}

std::string format_full(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

WeightedDiscreteMeasure::WeightedDiscreteMeasure(std::vector<double> atoms, int dim,
                                                 std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)), dim_(dim) {
  if (dim_ <= 0) throw std::invalid_argument("atom dimension must be positive");
  validate_weights(weights_);
  if (atoms_.size() != weights_.size() * static_cast<std::size_t>(dim_))
    throw std::invalid_argument("atom buffer size does not match weight count times dimension");
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::uniform(std::vector<double> atoms, int dim) {
  if (dim <= 0) throw std::invalid_argument("atom dimension must be positive");
  if (atoms.empty() || atoms.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("atom buffer size must be a positive multiple of dim");
  std::size_t n = atoms.size() / static_cast<std::size_t>(dim);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  return WeightedDiscreteMeasure(std::move(atoms), dim, std::move(w));
}

bool WeightedDiscreteMeasure::has_uniform_weights(double tol) const {
  double u = 1.0 / static_cast<double>(size());
  for (double w : weights_)
    if (std::abs(w - u) > tol) return false;
  return true;
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::with_weights(std::vector<double> weights) const {
  return WeightedDiscreteMeasure(atoms_, dim_, std::move(weights));
}

bool WeightedDiscreteMeasure::same_atoms(const WeightedDiscreteMeasure& other) const {
  return dim_ == other.dim_ && atoms_ == other.atoms_;
}

void WeightedDiscreteMeasure::to_csv(std::ostream& os) const {
  for (std::size_t j = 0; j < size(); ++j) {
    auto a = atom(j);
    for (double x : a) os << format_full(x) << ',';
    os << format_full(weights_[j]) << '\n';
  }
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::from_csv(std::istream& is) {
  std::vector<double> atoms, weights;
  int dim = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("bad number '" + cell + "' at CSV line " +
                                    std::to_string(lineno));
      }
    }
    if (row.size() < 2)
      throw std::invalid_argument("CSV line " + std::to_string(lineno) +
                                  " needs at least one coordinate and a weight");
    int d = static_cast<int>(row.size()) - 1;
    if (dim < 0) dim = d;
    if (d != dim)
      throw std::invalid_argument("inconsistent column count at CSV line " +
                                  std::to_string(lineno));
    atoms.insert(atoms.end(), row.begin(), row.end() - 1);
    weights.push_back(row.back());
  }
  if (weights.empty()) throw std::invalid_argument("empty measure CSV");
  return WeightedDiscreteMeasure(std::move(atoms), dim, std::move(weights));
}

void WeightedDiscreteMeasure::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  to_csv(os);
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return from_csv(is);
}

nlohmann::json WeightedDiscreteMeasure::to_json() const {
  nlohmann::json atoms = nlohmann::json::array();
  for (std::size_t j = 0; j < size(); ++j) {
    auto a = atom(j);
    atoms.push_back(std::vector<double>(a.begin(), a.end()));
  }
  return {{"atoms", atoms}, {"weights", weights_}};
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::from_json(const nlohmann::json& j) {
  const auto& atom_rows = j.at("atoms");
  std::vector<double> atoms;
  int dim = -1;
  for (const auto& row : atom_rows) {
    if (dim < 0) dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != dim)
      throw std::invalid_argument("inconsistent atom dimensions in JSON measure");
    for (const auto& x : row) atoms.push_back(x.get<double>());
  }
  std::vector<double> weights = j.at("weights").get<std::vector<double>>();
  return WeightedDiscreteMeasure(std::move(atoms), dim, std::move(weights));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

double kl_discrete(const WeightedDiscreteMeasure& q, const WeightedDiscreteMeasure& p) {
  if (!q.same_atoms(p))
    throw std::invalid_argument("kl_discrete requires identical atom lists");
  double kl = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    double qj = q.weights()[j];
    if (qj == 0.0) continue;
    double pj = p.weights()[j];
    if (pj == 0.0)
      throw AbsoluteContinuityError("kl_discrete: q puts mass where p has none (atom " +
                                    std::to_string(j) + ")");
    kl += qj * std::log(qj / pj);
  }
  return std::max(kl, 0.0);
}

double w2sq_1d(const WeightedDiscreteMeasure& a, const WeightedDiscreteMeasure& b) {
  if (a.dim() != 1 || b.dim() != 1)
    throw std::invalid_argument("w2sq_1d requires one-dimensional measures");

  // Stable sort on input index breaks value ties; this cannot change the cost.
  auto sorted_order = [](const WeightedDiscreteMeasure& m) {
    std::vector<std::size_t> idx(m.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
      return m.atoms()[i] < m.atoms()[j];
    });
    return idx;
  };
  std::vector<std::size_t> ia = sorted_order(a), ib = sorted_order(b);

  // Sweep cumulative-weight slabs of the monotone coupling.
  double cost = 0.0;
  std::size_t i = 0, j = 0;
  double ra = a.weights()[ia[0]], rb = b.weights()[ib[0]];
  while (true) {
    while (ra <= 0.0 && i + 1 < ia.size()) ra = a.weights()[ia[++i]];
    while (rb <= 0.0 && j + 1 < ib.size()) rb = b.weights()[ib[++j]];
    if (ra <= 0.0 || rb <= 0.0) break;
    double mass = std::min(ra, rb);
    double d = a.atoms()[ia[i]] - b.atoms()[ib[j]];
    cost += mass * d * d;
    ra -= mass;
    rb -= mass;
  }
  return cost;
}

double bounding_box_sq_diameter(const WeightedDiscreteMeasure& m) {
  double total = 0.0;
  for (int k = 0; k < m.dim(); ++k) {
    double lo = m.atoms()[k], hi = m.atoms()[k];
    for (std::size_t j = 1; j < m.size(); ++j) {
      double x = m.atoms()[j * static_cast<std::size_t>(m.dim()) + k];
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    total += (hi - lo) * (hi - lo);
  }
  return total;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("log_sum_exp of empty vector");
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) throw std::invalid_argument("log_sum_exp requires finite entries");
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> softmax_weights(const DualPotential& g, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("softmax_weights requires lambda > 0");
  if (g.empty()) throw std::invalid_argument("softmax_weights of empty potential");
  double m = -lambda * g[0];
  for (double gj : g) m = std::max(m, -lambda * gj);
  if (!std::isfinite(m)) throw std::invalid_argument("softmax_weights requires finite potential");
  std::vector<double> w(g.size());
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    w[j] = std::exp(-lambda * g[j] - m);
    s += w[j];
  }
  for (double& x : w) x /= s;
  return w;
}

}  // namespace bmrsw
