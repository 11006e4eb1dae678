#include "dro/maxcost.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dro {

namespace {

template <typename InBall>
MaxCostResult best_in_ball(const DroProblem& problem, InBall&& in_ball) {
  const std::size_t n = problem.nominal.size();
  const std::size_t m = problem.loss.size();
  MaxCostResult out;
  out.per_row_argmax.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = problem.cost.entries[i];
    std::size_t best = m;
    for (std::size_t j = 0; j < m; ++j) {
      if (!in_ball(c[j])) continue;
      if (best == m || problem.loss.values[j] > problem.loss.values[best]) best = j;
    }
    if (best == m) throw DroError(Errc::ShapeMismatch, "empty ball around a nominal atom");
    out.per_row_argmax[i] = best;
    out.value += problem.nominal.weights[i] * problem.loss.values[best];
  }
  return out;
}

}  // namespace

MaxCostResult linf_robust(const DroProblem& problem) {
  const double rho = problem.radius;
  return best_in_ball(problem, [rho](double c) { return c <= rho; });
}

MaxCostResult linf_robust_strict(const DroProblem& problem) {
  if (!(problem.radius > 0.0))
    throw DroError(Errc::ShapeMismatch, "strict ball needs a positive radius");
  const double rho = problem.radius;
  return best_in_ball(problem, [rho](double c) { return c < rho; });
}

double linf_soft(const DroProblem& problem, double lambda) {
  if (lambda < 0.0 || std::isnan(lambda))
    throw DroError(Errc::ShapeMismatch, "penalty must be nonnegative");
  // The ball value is a nondecreasing step function of the radius that only
  // jumps at realized finite costs, so the penalized supremum is attained at
  // radius 0 or at one of those costs.
  std::vector<double> radii{0.0};
  for (const auto& row : problem.cost.entries)
    for (double c : row)
      if (std::isfinite(c) && c > 0.0) radii.push_back(c);
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  DroProblem probe = problem;
  double best = -kInf;
  for (double r : radii) {
    probe.radius = r;
    best = std::max(best, linf_robust(probe).value - lambda * r);
  }
  return best;
}

double linf_primal_oracle(const DroProblem& problem) {
  // Row-separable check: with only a first-marginal constraint and arcs over
  // the ball, each atom independently moves to its best admissible column.
  const double rho = problem.radius;
  double total = 0.0;
  for (std::size_t i = 0; i < problem.nominal.size(); ++i) {
    const auto& c = problem.cost.entries[i];
    double best = -kInf;
    for (std::size_t j = 0; j < problem.loss.size(); ++j) {
      if (c[j] <= rho) best = std::max(best, problem.loss.values[j]);
    }
    total += problem.nominal.weights[i] * best;
  }
  return total;
}

}  // namespace dro
