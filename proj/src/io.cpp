#include "dro/io.hpp"

#include <algorithm>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace dro {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw DroError(Errc::ParseError, what); }

const Json& require(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) parse_fail(std::string("missing field '") + key + "'");
  return *it;
}

double number_at(const Json& v, const std::string& where) {
  if (!v.is_number()) parse_fail("field '" + where + "' must be a number");
  return v.get<double>();
}

// Cost entries are numbers or the string "inf" for a forbidden move.
double cost_entry(const Json& v, const std::string& where) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInf;
    parse_fail("field '" + where + "' must be a number or \"inf\"");
  }
  return number_at(v, where);
}

std::vector<double> number_array(const Json& v, const std::string& where) {
  if (!v.is_array()) parse_fail("field '" + where + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) out.push_back(number_at(e, where));
  return out;
}

std::vector<std::size_t> index_array(const Json& v, const std::string& where) {
  if (!v.is_array()) parse_fail("field '" + where + "' must be an array");
  std::vector<std::size_t> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number_unsigned()) parse_fail("field '" + where + "' must hold nonnegative integers");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

std::vector<std::vector<double>> cost_rows(const Json& v, const std::string& where) {
  if (!v.is_array()) parse_fail("field '" + where + "' must be a matrix");
  std::vector<std::vector<double>> out;
  out.reserve(v.size());
  for (const auto& row : v) {
    if (!row.is_array()) parse_fail("field '" + where + "' must be a matrix");
    std::vector<double> r;
    r.reserve(row.size());
    for (const auto& e : row) r.push_back(cost_entry(e, where));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<double>> coord_rows(const Json& v, const std::string& where) {
  std::vector<std::vector<double>> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (e.is_number())
      out.push_back({e.get<double>()});
    else
      out.push_back(number_array(e, where));
  }
  return out;
}

PointSet points_from_json(const Json& v) {
  if (!v.is_array() || v.empty()) parse_fail("field 'points' must be a nonempty array");
  PointSet points;
  if (v.front().is_string()) {
    for (const auto& e : v) {
      if (!e.is_string()) parse_fail("field 'points' mixes labels and coordinates");
      points.labels.push_back(e.get<std::string>());
    }
    return points;
  }
  points.coords = coord_rows(v, "points");
  points.labels.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) points.labels.push_back("x" + std::to_string(i));
  return points;
}

double order_from_json(const Json& j) {
  if (!j.contains("p")) return 1.0;
  const Json& v = j["p"];
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return kInf;
    parse_fail("field 'p' must be a number or \"inf\"");
  }
  return number_at(v, "p");
}

MetricKind metric_kind_from_name(const std::string& name) {
  if (name == "euclidean") return MetricKind::euclidean;
  if (name == "chebyshev") return MetricKind::chebyshev;
  if (name == "manhattan") return MetricKind::manhattan;
  parse_fail("field 'metric' must be euclidean, chebyshev, or manhattan");
}

Json cost_row_to_json(const std::vector<double>& row) {
  Json out = Json::array();
  for (double v : row) {
    if (v < kInf)
      out.push_back(v);
    else
      out.push_back("inf");
  }
  return out;
}

}  // namespace

DroProblem problem_from_json(const Json& j) {
  if (!j.is_object()) parse_fail("instance must be a JSON object");
  DroProblem problem;
  problem.points = points_from_json(require(j, "points"));

  const Json& nominal = require(j, "nominal");
  problem.nominal.support = index_array(require(nominal, "support"), "nominal.support");
  problem.nominal.weights = number_array(require(nominal, "weights"), "nominal.weights");

  problem.loss.values = number_array(require(j, "loss"), "loss");
  problem.radius = number_at(require(j, "radius"), "radius");

  const double p = j.contains("p") ? number_at(j["p"], "p") : 1.0;
  CostMatrix square;
  if (j.contains("cost")) {
    square = cost_from_metric(problem.points,
                              MetricSpec::explicit_costs(cost_rows(j["cost"], "cost")), p);
  } else {
    const Json& metric = require(j, "metric");
    if (!metric.is_string()) parse_fail("field 'metric' must be a string");
    square = cost_from_metric(
        problem.points, MetricSpec::named(metric_kind_from_name(metric.get<std::string>())), p);
  }
  problem.cost = rows_for_support(square, problem.nominal.support);
  return validate_problem(std::move(problem));
}

ChanceInstance chance_from_json(const Json& j) {
  if (!j.is_object()) parse_fail("instance must be a JSON object");
  ChanceInstance instance;
  instance.weights = number_array(require(j, "weights"), "weights");

  if (j.contains("unsafe_distance")) {
    instance.unsafe_distance = number_array(j["unsafe_distance"], "unsafe_distance");
  } else {
    const Json& unsafe = require(j, "unsafe_set");
    const Json& kind = require(unsafe, "kind");
    if (!kind.is_string()) parse_fail("field 'unsafe_set.kind' must be a string");
    const std::string name = kind.get<std::string>();
    if (name == "halfline") {
      const std::vector<double> atoms = number_array(require(j, "atoms"), "atoms");
      const double boundary = number_at(require(unsafe, "boundary"), "unsafe_set.boundary");
      const Json& above = require(unsafe, "above");
      if (!above.is_boolean()) parse_fail("field 'unsafe_set.above' must be a boolean");
      instance.unsafe_distance = distances_to_halfline(atoms, boundary, above.get<bool>());
    } else if (name == "box") {
      const Json& pts = require(j, "points");
      if (!pts.is_array()) parse_fail("field 'points' must be an array");
      const std::vector<std::vector<double>> points = coord_rows(pts, "points");
      const std::vector<double> lo = number_array(require(unsafe, "lo"), "unsafe_set.lo");
      const std::vector<double> hi = number_array(require(unsafe, "hi"), "unsafe_set.hi");
      MetricKind norm = MetricKind::euclidean;
      if (unsafe.contains("norm")) {
        if (!unsafe["norm"].is_string()) parse_fail("field 'unsafe_set.norm' must be a string");
        norm = metric_kind_from_name(unsafe["norm"].get<std::string>());
      }
      instance.unsafe_distance = distances_to_box(points, lo, hi, norm);
    } else {
      parse_fail("field 'unsafe_set.kind' must be halfline or box");
    }
  }

  instance.p = order_from_json(j);
  instance.rho = number_at(require(j, "rho"), "rho");
  instance.beta = number_at(require(j, "beta"), "beta");
  return validate_chance(std::move(instance));
}

GlobalizedInstance globalized_from_json(const Json& j) {
  GlobalizedInstance instance;
  instance.base = problem_from_json(j);
  instance.inner_cost = cost_from_metric(
      instance.base.points,
      MetricSpec::explicit_costs(cost_rows(require(j, "inner_cost"), "inner_cost")), 1.0);
  // Absent theta defaults to zero; the CLI can supply it as a flag.
  instance.theta = j.contains("theta") ? number_at(j["theta"], "theta") : 0.0;
  return validate_globalized(std::move(instance));
}

RobustMdp mdp_from_json(const Json& j) {
  if (!j.is_object()) parse_fail("instance must be a JSON object");
  RobustMdp mdp;

  const Json& states = require(j, "states");
  if (states.is_number_unsigned())
    mdp.num_states = states.get<std::size_t>();
  else if (states.is_array())
    mdp.num_states = states.size();
  else
    parse_fail("field 'states' must be a count or an array of labels");

  const Json& actions = require(j, "actions");
  if (actions.is_number_unsigned())
    mdp.actions_per_state.assign(mdp.num_states, actions.get<std::size_t>());
  else
    mdp.actions_per_state = index_array(actions, "actions");

  const Json& horizon = require(j, "horizon");
  if (!horizon.is_number_unsigned()) parse_fail("field 'horizon' must be a nonnegative integer");
  mdp.horizon = horizon.get<std::size_t>();

  const Json& g = require(j, "g");
  if (!g.is_array()) parse_fail("field 'g' must be an array over stages");
  for (const auto& stage : g) {
    if (!stage.is_array()) parse_fail("field 'g' must be a stage-by-state-by-action array");
    std::vector<std::vector<double>> rows;
    for (const auto& row : stage) rows.push_back(number_array(row, "g"));
    mdp.stage_costs.push_back(std::move(rows));
  }

  const Json& kernels = require(j, "kernels");
  if (!kernels.is_array()) parse_fail("field 'kernels' must be an array over states");
  for (const auto& per_state : kernels) {
    if (!per_state.is_array()) parse_fail("field 'kernels' must be an array per state");
    std::vector<DiscreteDistribution> row;
    for (const auto& k : per_state) {
      DiscreteDistribution kernel;
      if (k.is_object()) {
        kernel.support = index_array(require(k, "support"), "kernels.support");
        kernel.weights = number_array(require(k, "weights"), "kernels.weights");
        // Canonical ascending order keeps serialization round-trips stable.
        std::vector<std::size_t> order(kernel.support.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return kernel.support[a] < kernel.support[b];
        });
        DiscreteDistribution sorted;
        for (std::size_t i : order) {
          sorted.support.push_back(kernel.support[i]);
          sorted.weights.push_back(kernel.weights[i]);
        }
        kernel = std::move(sorted);
      } else {
        kernel.weights = number_array(k, "kernels");
        kernel.support.resize(kernel.weights.size());
        for (std::size_t i = 0; i < kernel.support.size(); ++i) kernel.support[i] = i;
      }
      row.push_back(std::move(kernel));
    }
    mdp.kernels.push_back(std::move(row));
  }

  const Json& rho = require(j, "rho");
  if (!rho.is_array()) parse_fail("field 'rho' must be an array over states");
  for (const auto& row : rho) mdp.radii.push_back(number_array(row, "rho"));

  mdp.cost.entries = cost_rows(require(j, "cost"), "cost");
  mdp.cost.diagonal_map.resize(mdp.cost.entries.size());
  for (std::size_t s = 0; s < mdp.cost.diagonal_map.size(); ++s) mdp.cost.diagonal_map[s] = s;

  return validate_mdp(std::move(mdp));
}

ScalarSamples samples_from_json(const Json& j) {
  if (!j.is_object()) parse_fail("samples must be a JSON object");
  ScalarSamples samples;
  samples.atoms = number_array(require(j, "atoms"), "atoms");
  samples.weights = number_array(require(j, "weights"), "weights");
  return samples;
}

ParsedInstance parse_instance_json(const Json& j) {
  if (!j.is_object()) parse_fail("instance must be a JSON object");
  if (j.contains("kernels")) return mdp_from_json(j);
  if (j.contains("unsafe_distance") || j.contains("unsafe_set")) return chance_from_json(j);
  if (j.contains("inner_cost")) return globalized_from_json(j);
  return problem_from_json(j);
}

ParsedInstance parse_problem_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) parse_fail("cannot open file: " + path);
  Json j;
  try {
    j = Json::parse(file);
  } catch (const nlohmann::json::exception& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
  return parse_instance_json(j);
}

Json problem_to_json(const DroProblem& problem) {
  Json j = Json::object();
  if (problem.points.coords)
    j["points"] = *problem.points.coords;
  else
    j["points"] = problem.points.labels;

  // Rows off the nominal support are never read back, so they carry zeros.
  const std::size_t m = problem.points.size();
  Json square = Json::array();
  for (std::size_t r = 0; r < m; ++r) square.push_back(std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < problem.nominal.size(); ++i)
    square[problem.nominal.support[i]] = cost_row_to_json(problem.cost.entries[i]);
  j["cost"] = std::move(square);
  j["p"] = 1.0;

  j["nominal"] = Json{{"support", problem.nominal.support}, {"weights", problem.nominal.weights}};
  j["loss"] = problem.loss.values;
  j["radius"] = problem.radius;
  return j;
}

Json chance_to_json(const ChanceInstance& instance) {
  Json j = Json::object();
  j["weights"] = instance.weights;
  j["unsafe_distance"] = instance.unsafe_distance;
  if (instance.p < kInf)
    j["p"] = instance.p;
  else
    j["p"] = "inf";
  j["rho"] = instance.rho;
  j["beta"] = instance.beta;
  return j;
}

Json globalized_to_json(const GlobalizedInstance& instance) {
  Json j = problem_to_json(instance.base);
  Json inner = Json::array();
  for (const auto& row : instance.inner_cost.entries) inner.push_back(cost_row_to_json(row));
  j["inner_cost"] = std::move(inner);
  j["theta"] = instance.theta;
  return j;
}

Json mdp_to_json(const RobustMdp& mdp) {
  Json j = Json::object();
  j["states"] = mdp.num_states;
  j["actions"] = mdp.actions_per_state;
  j["horizon"] = mdp.horizon;
  j["g"] = mdp.stage_costs;

  Json kernels = Json::array();
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    Json row = Json::array();
    for (std::size_t a = 0; a < mdp.actions_per_state[s]; ++a) {
      std::vector<double> dense(mdp.num_states, 0.0);
      const DiscreteDistribution& k = mdp.kernels[s][a];
      for (std::size_t i = 0; i < k.size(); ++i) dense[k.support[i]] = k.weights[i];
      row.push_back(dense);
    }
    kernels.push_back(std::move(row));
  }
  j["kernels"] = std::move(kernels);

  j["rho"] = mdp.radii;
  Json cost = Json::array();
  for (const auto& row : mdp.cost.entries) cost.push_back(cost_row_to_json(row));
  j["cost"] = std::move(cost);
  return j;
}

}  // namespace dro
