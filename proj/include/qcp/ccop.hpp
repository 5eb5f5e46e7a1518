#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace qcp {

// Bit convention used everywhere: index 0 = qubit 0 = least-significant bit
// of the computational-basis integer label.
class BitString {
public:
  BitString(std::uint64_t label, int n) : label_(label), n_(n) {
    if (n < 1 || n > 63) throw std::invalid_argument("BitString: bad size");
    if (label >> n) throw std::invalid_argument("BitString: label out of range");
  }

  // Parses "101" with the leftmost character as bit index 0.
  static BitString parse(const std::string& s) {
    std::uint64_t label = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1')
        label |= std::uint64_t{1} << i;
      else if (s[i] != '0')
        throw std::invalid_argument("BitString: bad character");
    }
    return BitString(label, static_cast<int>(s.size()));
  }

  std::uint64_t label() const { return label_; }
  int size() const { return n_; }
  int bit(int i) const { return static_cast<int>((label_ >> i) & 1); }
  int popcount() const { return std::popcount(label_); }

  std::string str() const {
    std::string s(static_cast<std::size_t>(n_), '0');
    for (int i = 0; i < n_; ++i)
      if (bit(i)) s[static_cast<std::size_t>(i)] = '1';
    return s;
  }

  friend bool operator==(const BitString&, const BitString&) = default;

private:
  std::uint64_t label_;
  int n_;
};

inline constexpr int kEnumerationCap = 24;

// Classical problem (n, c, S). The stored objective is already shifted so
// that it is strictly positive everywhere; `offset` records the shift and
// `reporting_scale` the factor needed to undo a Prop-1 rescaling.
struct CcopInstance {
  int n = 0;
  std::function<double(std::uint64_t)> objective;   // shifted, > 0
  std::function<bool(std::uint64_t)> feasible;
  double c_upper = 0.0;        // upper bound on objective over the feasible set
  double c_offset = 0.0;       // shift applied to the raw objective
  double reporting_scale = 1.0; // multiply reported energies by this to un-scale
  std::string name = "custom";
};

inline void check_length(const CcopInstance& inst, const BitString& b) {
  if (b.size() != inst.n)
    throw std::invalid_argument("bit string length does not match instance size");
}

inline double evaluate_objective(const CcopInstance& inst, const BitString& b) {
  check_length(inst, b);
  return inst.objective(b.label());
}

inline bool is_feasible(const CcopInstance& inst, const BitString& b) {
  check_length(inst, b);
  return inst.feasible(b.label());
}

struct BruteForceResult {
  bool has_feasible = false;   // false => "infeasible instance"
  double optimum = 0.0;
  std::vector<std::uint64_t> optimizers;
  std::uint64_t feasible_count = 0;
};

inline BruteForceResult brute_force_optimum(const CcopInstance& inst) {
  if (inst.n > kEnumerationCap)
    throw std::invalid_argument("brute_force_optimum: instance exceeds enumeration cap");
  BruteForceResult r;
  double best = std::numeric_limits<double>::infinity();
  const std::uint64_t dim = std::uint64_t{1} << inst.n;
  for (std::uint64_t b = 0; b < dim; ++b) {
    if (!inst.feasible(b)) continue;
    ++r.feasible_count;
    const double v = inst.objective(b);
    if (v < best - 1e-12) {
      best = v;
      r.optimizers.assign(1, b);
    } else if (v <= best + 1e-12) {
      r.optimizers.push_back(b);
    }
  }
  r.has_feasible = r.feasible_count > 0;
  r.optimum = r.has_feasible ? best : 0.0;
  return r;
}

namespace detail {

// Enumerates min/max of a raw objective; used when no analytic bound is given.
inline std::pair<double, double> enumerate_range(
    int n, const std::function<double(std::uint64_t)>& f) {
  if (n > kEnumerationCap)
    throw std::invalid_argument("objective bound required above enumeration cap");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::uint64_t dim = std::uint64_t{1} << n;
  for (std::uint64_t b = 0; b < dim; ++b) {
    const double v = f(b);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

} // namespace detail

// Builds an instance from a raw objective. offset = 1 - lower bound makes the
// stored objective strictly positive; bounds are enumerated at desk scale when
// not supplied. `feasible_upper` bounds the raw objective over the feasible set.
inline CcopInstance make_instance(int n,
                                  std::function<double(std::uint64_t)> raw,
                                  std::function<bool(std::uint64_t)> feasible,
                                  double raw_lower = std::numeric_limits<double>::quiet_NaN(),
                                  double feasible_upper = std::numeric_limits<double>::quiet_NaN(),
                                  std::string name = "custom") {
  if (n < 1) throw std::invalid_argument("instance size must be positive");
  double lo = raw_lower;
  double up = feasible_upper;
  if (std::isnan(lo)) lo = detail::enumerate_range(n, raw).first;
  if (std::isnan(up)) {
    // max of the raw objective over the feasible set
    if (n > kEnumerationCap)
      throw std::invalid_argument("feasible upper bound required above enumeration cap");
    up = -std::numeric_limits<double>::infinity();
    const std::uint64_t dim = std::uint64_t{1} << n;
    for (std::uint64_t b = 0; b < dim; ++b)
      if (feasible(b)) up = std::max(up, raw(b));
    if (up == -std::numeric_limits<double>::infinity()) up = lo; // empty S
  }
  CcopInstance inst;
  inst.n = n;
  inst.c_offset = 1.0 - lo;
  const double offset = inst.c_offset;
  inst.objective = [raw = std::move(raw), offset](std::uint64_t b) {
    return raw(b) + offset;
  };
  inst.feasible = std::move(feasible);
  inst.c_upper = up + offset;
  inst.name = std::move(name);
  return inst;
}

// Penalty-augmented unconstrained instance; the original optima survive when
// the penalty exceeds the objective spread.
inline CcopInstance soft_constrained(const CcopInstance& inst, double penalty) {
  if (!(penalty > 0.0))
    throw std::invalid_argument("soft_constrained: penalty must be positive");
  CcopInstance soft;
  soft.n = inst.n;
  soft.c_offset = inst.c_offset;
  soft.reporting_scale = inst.reporting_scale;
  soft.name = inst.name + "_soft";
  soft.objective = [obj = inst.objective, feas = inst.feasible,
                    penalty](std::uint64_t b) {
    return feas(b) ? obj(b) : obj(b) + penalty;
  };
  soft.feasible = [](std::uint64_t) { return true; };
  if (inst.n <= kEnumerationCap)
    soft.c_upper = detail::enumerate_range(inst.n, soft.objective).second;
  else
    soft.c_upper = inst.c_upper + penalty;
  return soft;
}

// Divides the objective by c_upper so it lies in (0, 1] on the feasible set;
// the scale factor is kept for un-scaling reported energies.
inline CcopInstance rescale_for_prop1(const CcopInstance& inst) {
  if (!(inst.c_upper > 0.0))
    throw std::invalid_argument("rescale_for_prop1: c_upper must be positive");
  CcopInstance scaled = inst;
  const double s = inst.c_upper;
  scaled.objective = [obj = inst.objective, s](std::uint64_t b) { return obj(b) / s; };
  scaled.c_upper = 1.0;
  scaled.reporting_scale = inst.reporting_scale * s;
  scaled.name = inst.name + "_rescaled";
  return scaled;
}

// ---- built-in instances ----

// 0/1 knapsack: minimize -sum(profit_i b_i) subject to sum(weight_i b_i) <= capacity.
inline CcopInstance make_knapsack(std::vector<double> weights,
                                  std::vector<double> profits, double capacity) {
  if (weights.size() != profits.size() || weights.empty())
    throw std::invalid_argument("knapsack: weights/profits size mismatch");
  const int n = static_cast<int>(weights.size());
  double profit_sum = 0.0;
  for (double p : profits) profit_sum += p;
  auto raw = [profits](std::uint64_t b) {
    double v = 0.0;
    for (std::size_t i = 0; i < profits.size(); ++i)
      if ((b >> i) & 1) v -= profits[i];
    return v;
  };
  auto feas = [weights, capacity](std::uint64_t b) {
    double w = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
      if ((b >> i) & 1) w += weights[i];
    return w <= capacity + 1e-12;
  };
  // lower bound: select everything; feasible max: empty selection (profits >= 0)
  return make_instance(n, raw, feas, -profit_sum, 0.0, "knapsack");
}

// Maximum independent set: minimize -|selected| subject to no edge inside.
inline CcopInstance make_mis(int n_vertices,
                             std::vector<std::pair<int, int>> edges) {
  for (auto [u, v] : edges)
    if (u < 0 || v < 0 || u >= n_vertices || v >= n_vertices)
      throw std::invalid_argument("mis: edge endpoint out of range");
  auto raw = [](std::uint64_t b) { return -static_cast<double>(std::popcount(b)); };
  auto feas = [edges](std::uint64_t b) {
    for (auto [u, v] : edges)
      if (((b >> u) & 1) && ((b >> v) & 1)) return false;
    return true;
  };
  return make_instance(n_vertices, raw, feas, -static_cast<double>(n_vertices),
                       0.0, "mis");
}

// Symmetric TSP on a one-hot permutation-matrix encoding: bit (city*nc + t)
// means "city visited at time t". The quadratic objective
//   sum_t sum_{u,v} w[u][v] b_{u,t} b_{v,t+1}
// equals the tour length on valid permutations and stays total elsewhere.
inline CcopInstance make_tsp(std::vector<std::vector<double>> w) {
  const int nc = static_cast<int>(w.size());
  if (nc < 2) throw std::invalid_argument("tsp: need at least two cities");
  double wmax = 0.0;
  for (const auto& row : w) {
    if (static_cast<int>(row.size()) != nc)
      throw std::invalid_argument("tsp: weight matrix must be square");
    for (double x : row) {
      if (x < 0.0) throw std::invalid_argument("tsp: negative weight");
      wmax = std::max(wmax, x);
    }
  }
  const int n = nc * nc;
  auto raw = [w, nc](std::uint64_t b) {
    double cost = 0.0;
    for (int t = 0; t < nc; ++t) {
      const int t2 = (t + 1) % nc;
      for (int u = 0; u < nc; ++u) {
        if (!((b >> (u * nc + t)) & 1)) continue;
        for (int v = 0; v < nc; ++v)
          if ((b >> (v * nc + t2)) & 1) cost += w[u][v];
      }
    }
    return cost;
  };
  auto feas = [nc](std::uint64_t b) {
    for (int t = 0; t < nc; ++t) {  // one city per time step
      int count = 0;
      for (int u = 0; u < nc; ++u) count += (b >> (u * nc + t)) & 1;
      if (count != 1) return false;
    }
    for (int u = 0; u < nc; ++u) {  // each city exactly once
      int count = 0;
      for (int t = 0; t < nc; ++t) count += (b >> (u * nc + t)) & 1;
      if (count != 1) return false;
    }
    return true;
  };
  return make_instance(n, raw, feas, 0.0, nc * wmax, "tsp");
}

inline CcopInstance make_custom_table(std::vector<double> objective,
                                      std::vector<int> feasible_bits) {
  const std::size_t dim = objective.size();
  if (dim < 2 || (dim & (dim - 1)) != 0 || feasible_bits.size() != dim)
    throw std::invalid_argument("custom_table: arrays must have matching power-of-two length");
  const int n = std::countr_zero(dim);
  auto raw = [objective](std::uint64_t b) { return objective[b]; };
  auto feas = [feasible_bits](std::uint64_t b) { return feasible_bits[b] != 0; };
  return make_instance(n, raw, feas,
                       std::numeric_limits<double>::quiet_NaN(),
                       std::numeric_limits<double>::quiet_NaN(), "custom_table");
}

// JSON instance files: {"type": "knapsack"|"mis"|"tsp"|"custom_table", ...}
inline CcopInstance instance_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "knapsack") {
    return make_knapsack(j.at("weights").get<std::vector<double>>(),
                         j.at("profits").get<std::vector<double>>(),
                         j.at("capacity").get<double>());
  }
  if (type == "mis") {
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges"))
      edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    return make_mis(j.at("n").get<int>(), std::move(edges));
  }
  if (type == "tsp") {
    return make_tsp(j.at("weights").get<std::vector<std::vector<double>>>());
  }
  if (type == "custom_table") {
    return make_custom_table(j.at("objective").get<std::vector<double>>(),
                             j.at("feasible").get<std::vector<int>>());
  }
  throw std::invalid_argument("unknown instance type: " + type);
}

} // namespace qcp
