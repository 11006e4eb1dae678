#pragma once

#include <utility>
#include <vector>

#include "dro/problem.hpp"

namespace dro_test {

// Candidates on the real line with transport cost |x - y|^p.
inline dro::DroProblem line_problem(std::vector<double> xs, std::vector<double> loss,
                                    std::vector<std::size_t> support, std::vector<double> weights,
                                    double radius, double p = 1.0) {
  dro::DroProblem problem;
  for (double x : xs) problem.points.labels.push_back("x" + std::to_string(x));
  std::vector<std::vector<double>> coords;
  for (double x : xs) coords.push_back({x});
  problem.points.coords = std::move(coords);
  const dro::CostMatrix square = dro::cost_from_metric(
      problem.points, dro::MetricSpec::named(dro::MetricKind::euclidean), p);
  problem.nominal.support = std::move(support);
  problem.nominal.weights = std::move(weights);
  problem.cost = dro::rows_for_support(square, problem.nominal.support);
  problem.loss.values = std::move(loss);
  problem.radius = radius;
  return dro::validate_problem(std::move(problem));
}

// Unit mass at 0; candidates {0, 1} with losses {0, 1}; cost |x - y|.
inline dro::DroProblem two_point(double radius) {
  return line_problem({0.0, 1.0}, {0.0, 1.0}, {0}, {1.0}, radius);
}

// Unit mass at 0; candidates {0, eps, 1} with losses {0, 1, 1}; cost |x - y|.
// The exact value is min(radius / eps, 1) for every positive radius.
inline dro::DroProblem kink_problem(double eps, double radius) {
  return line_problem({0.0, eps, 1.0}, {0.0, 1.0, 1.0}, {0}, {1.0}, radius);
}

}  // namespace dro_test
