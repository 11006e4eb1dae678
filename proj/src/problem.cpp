#include "dro/problem.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace dro {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NegativeWeight: return "NegativeWeight";
    case Errc::WeightsNotNormalized: return "WeightsNotNormalized";
    case Errc::NegativeCost: return "NegativeCost";
    case Errc::MissingDiagonalZero: return "MissingDiagonalZero";
    case Errc::MissingCoordinates: return "MissingCoordinates";
    case Errc::InvalidP: return "InvalidP";
    case Errc::OverflowEntropic: return "OverflowEntropic";
    case Errc::UnsupportedCombination: return "UnsupportedCombination";
    case Errc::ParseError: return "ParseError";
  }
  return "UnknownError";
}

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) { throw DroError(code, what); }

void check_point_set(const PointSet& points) {
  if (points.labels.empty()) fail(Errc::ShapeMismatch, "point set must be nonempty");
  std::unordered_set<std::string> seen;
  for (const auto& label : points.labels) {
    if (!seen.insert(label).second) fail(Errc::ShapeMismatch, "duplicate point label: " + label);
  }
  if (points.coords) {
    if (points.coords->size() != points.labels.size())
      fail(Errc::ShapeMismatch, "coords size differs from label count");
    const std::size_t dim = points.coords->empty() ? 0 : points.coords->front().size();
    for (const auto& c : *points.coords) {
      if (c.size() != dim) fail(Errc::ShapeMismatch, "coordinate vectors have mixed dimensions");
      for (double v : c) {
        if (!std::isfinite(v)) fail(Errc::ShapeMismatch, "coordinates must be finite");
      }
    }
  }
}

void check_cost_matrix(const CostMatrix& cost, std::size_t rows, std::size_t cols) {
  if (cost.rows() != rows) fail(Errc::ShapeMismatch, "cost row count differs from nominal support");
  if (cost.diagonal_map.size() != rows)
    fail(Errc::ShapeMismatch, "diagonal map size differs from cost rows");
  for (std::size_t i = 0; i < rows; ++i) {
    if (cost.entries[i].size() != cols)
      fail(Errc::ShapeMismatch, "cost rows have mixed column counts");
    for (double v : cost.entries[i]) {
      if (std::isnan(v) || v < 0.0) fail(Errc::NegativeCost, "cost entries must be nonnegative");
    }
    const std::size_t d = cost.diagonal_map[i];
    if (d >= cols) fail(Errc::ShapeMismatch, "diagonal map column out of range");
    if (cost.entries[i][d] != 0.0)
      fail(Errc::MissingDiagonalZero, "matching-point cost must be exactly zero");
  }
}

}  // namespace

DroProblem validate_problem(DroProblem problem) {
  check_point_set(problem.points);
  const std::size_t m = problem.points.size();

  auto& nominal = problem.nominal;
  if (nominal.support.size() != nominal.weights.size())
    fail(Errc::ShapeMismatch, "nominal support and weights differ in length");
  if (nominal.support.empty()) fail(Errc::ShapeMismatch, "nominal distribution is empty");
  for (double w : nominal.weights) {
    if (std::isnan(w) || w < 0.0) fail(Errc::NegativeWeight, "nominal weights must be nonnegative");
  }
  if (problem.cost.rows() != nominal.size())
    fail(Errc::ShapeMismatch, "cost row count differs from nominal support");
  if (problem.cost.diagonal_map.size() != nominal.size())
    fail(Errc::ShapeMismatch, "diagonal map size differs from cost rows");

  // Zero-weight atoms and their cost rows are dropped before normalization.
  if (std::find(nominal.weights.begin(), nominal.weights.end(), 0.0) != nominal.weights.end()) {
    DiscreteDistribution kept;
    CostMatrix kept_cost;
    for (std::size_t i = 0; i < nominal.weights.size(); ++i) {
      if (nominal.weights[i] == 0.0) continue;
      kept.support.push_back(nominal.support[i]);
      kept.weights.push_back(nominal.weights[i]);
      kept_cost.entries.push_back(problem.cost.entries[i]);
      kept_cost.diagonal_map.push_back(problem.cost.diagonal_map[i]);
    }
    nominal = std::move(kept);
    problem.cost = std::move(kept_cost);
    if (nominal.support.empty())
      fail(Errc::WeightsNotNormalized, "all nominal weights are zero");
  }

  std::unordered_set<std::size_t> seen;
  for (std::size_t idx : nominal.support) {
    if (idx >= m) fail(Errc::ShapeMismatch, "nominal support index out of range");
    if (!seen.insert(idx).second) fail(Errc::ShapeMismatch, "nominal support indices must be distinct");
  }

  double sum = 0.0;
  for (double w : nominal.weights) sum += w;
  if (std::abs(sum - 1.0) > 1e-12)
    fail(Errc::WeightsNotNormalized, "nominal weights sum to " + std::to_string(sum));
  if (sum != 1.0) {
    for (double& w : nominal.weights) w /= sum;
    // Pin the tail weight so this loop's sum is exactly one on the next pass;
    // renormalizing twice must be a no-op or serialization round-trips drift.
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < nominal.weights.size(); ++i) head += nominal.weights[i];
    if (1.0 - head > 0.0) nominal.weights.back() = 1.0 - head;
  }

  if (problem.loss.size() != m) fail(Errc::ShapeMismatch, "loss length differs from point count");
  for (double v : problem.loss.values) {
    if (!std::isfinite(v)) fail(Errc::ShapeMismatch, "loss values must be finite");
  }

  check_cost_matrix(problem.cost, nominal.size(), m);

  if (std::isnan(problem.radius) || problem.radius < 0.0)
    fail(Errc::ShapeMismatch, "radius must be nonnegative");

  return problem;
}

namespace {

double distance(const std::vector<double>& a, const std::vector<double>& b, MetricKind kind) {
  double acc = 0.0;
  switch (kind) {
    case MetricKind::euclidean:
      for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
      return std::sqrt(acc);
    case MetricKind::chebyshev:
      for (std::size_t k = 0; k < a.size(); ++k) acc = std::max(acc, std::abs(a[k] - b[k]));
      return acc;
    case MetricKind::manhattan:
      for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
      return acc;
    case MetricKind::explicit_matrix: break;
  }
  fail(Errc::ShapeMismatch, "explicit matrix has no pointwise metric");
}

double power(double d, double p) {
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

}  // namespace

CostMatrix cost_from_metric(const PointSet& points, const MetricSpec& metric, double p) {
  check_point_set(points);
  if (std::isnan(p) || p < 1.0 || std::isinf(p)) fail(Errc::InvalidP, "metric order must be finite and >= 1");
  const std::size_t m = points.size();

  CostMatrix out;
  out.entries.assign(m, std::vector<double>(m, 0.0));
  out.diagonal_map.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.diagonal_map[i] = i;

  if (metric.kind == MetricKind::explicit_matrix) {
    if (!metric.matrix) fail(Errc::ShapeMismatch, "explicit metric requires a matrix");
    const auto& d = *metric.matrix;
    if (d.size() != m) fail(Errc::ShapeMismatch, "explicit matrix row count differs from point count");
    for (std::size_t i = 0; i < m; ++i) {
      if (d[i].size() != m) fail(Errc::ShapeMismatch, "explicit matrix must be square");
      for (std::size_t j = 0; j < m; ++j) {
        const double v = d[i][j];
        if (std::isnan(v) || v < 0.0) fail(Errc::NegativeCost, "distances must be nonnegative");
        out.entries[i][j] = power(v, p);
      }
      if (out.entries[i][i] != 0.0)
        fail(Errc::MissingDiagonalZero, "explicit matrix diagonal must be zero");
    }
    return out;
  }

  if (!points.coords) fail(Errc::MissingCoordinates, "named metrics require point coordinates");
  const auto& coords = *points.coords;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = power(distance(coords[i], coords[j], metric.kind), p);
      out.entries[i][j] = v;
      out.entries[j][i] = v;
    }
  }
  return out;
}

CostMatrix rows_for_support(const CostMatrix& square, const std::vector<std::size_t>& support) {
  CostMatrix out;
  out.entries.reserve(support.size());
  out.diagonal_map.reserve(support.size());
  for (std::size_t idx : support) {
    if (idx >= square.rows()) fail(Errc::ShapeMismatch, "support index outside cost matrix");
    out.entries.push_back(square.entries[idx]);
    out.diagonal_map.push_back(square.diagonal_map[idx]);
  }
  return out;
}

}  // namespace dro
