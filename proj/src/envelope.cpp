#include "dro/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dro {

double PLConvexFunction::eval(double x) const {
  if (breakpoints.empty()) return 0.0;
  if (x >= breakpoints.back() || slopes.empty())
    return values.back() + tail_slope * (x - breakpoints.back());
  // Largest k with breakpoints[k] <= x; x below the first breakpoint
  // extrapolates the first segment.
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  const std::size_t k = it == breakpoints.begin() ? 0 : (it - breakpoints.begin()) - 1;
  return values[k] + slopes[k] * (x - breakpoints[k]);
}

double PLConvexFunction::slope_after(double x) const {
  if (breakpoints.empty() || slopes.empty() || x >= breakpoints.back()) return tail_slope;
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  const std::size_t k = it == breakpoints.begin() ? 0 : (it - breakpoints.begin()) - 1;
  return slopes[k];
}

PLConvexFunction row_envelope(const LossVector& loss, const std::vector<double>& cost_row,
                              double lambda_max_hint) {
  struct Line {
    double slope;      // -cost
    double intercept;  // loss
  };
  std::vector<Line> lines;
  lines.reserve(cost_row.size());
  for (std::size_t j = 0; j < cost_row.size(); ++j) {
    if (!std::isfinite(cost_row[j])) continue; // unreachable even at zero penalty
    lines.push_back({-cost_row[j], loss.values[j]});
  }
  // Ascending slope; for equal slopes keep only the best intercept.
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return a.slope < b.slope || (a.slope == b.slope && a.intercept > b.intercept);
  });
  lines.erase(std::unique(lines.begin(), lines.end(),
                          [](const Line& a, const Line& b) { return a.slope == b.slope; }),
              lines.end());

  // Upper hull: with slopes increasing, the envelope visits the surviving
  // lines left to right. A line is dropped when the newcomer overtakes its
  // predecessor no later than the line itself did.
  auto cross = [](const Line& a, const Line& b) {
    return (a.intercept - b.intercept) / (b.slope - a.slope);
  };
  std::vector<Line> hull;
  hull.reserve(lines.size());
  for (const Line& ln : lines) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], ln) <= cross(hull[hull.size() - 2], hull.back()))
      hull.pop_back();
    if (hull.size() == 1 && ln.intercept >= hull.back().intercept) hull.pop_back();
    hull.push_back(ln);
  }

  // Restrict to the half-line: find the hull piece active at 0 and keep the
  // crossings that land strictly to the right of it.
  std::vector<double> cuts; // cuts[k] = where hull[k+1] takes over from hull[k]
  cuts.reserve(hull.size());
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) cuts.push_back(cross(hull[k], hull[k + 1]));
  std::size_t first = 0;
  while (first < cuts.size() && cuts[first] <= 0.0) ++first;

  PLConvexFunction out;
  const std::size_t pieces = hull.size() - first;
  out.breakpoints.reserve(pieces + (lambda_max_hint > 0.0 ? 4 : 0));
  out.breakpoints.push_back(0.0);
  out.values.push_back(hull[first].intercept);
  for (std::size_t k = first; k + 1 < hull.size(); ++k) {
    out.slopes.push_back(hull[k].slope);
    out.breakpoints.push_back(cuts[k]);
    out.values.push_back(hull[k + 1].intercept + hull[k + 1].slope * cuts[k]);
  }
  out.tail_slope = hull.back().slope;
  return out;
}

PLConvexFunction envelope_G(const DroProblem& problem) {
  const std::size_t n = problem.nominal.size();
  const auto& w = problem.nominal.weights;

  std::vector<double> grid{0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const PLConvexFunction phi =
        row_envelope(problem.loss, problem.cost.entries[i]);
    grid.insert(grid.end(), phi.breakpoints.begin(), phi.breakpoints.end());
  }
  std::sort(grid.begin(), grid.end());
  std::vector<double> merged;
  merged.reserve(grid.size());
  for (double b : grid) {
    if (merged.empty() || b - merged.back() > 1e-9 * (1.0 + merged.back())) merged.push_back(b);
  }

  // Values by direct scans at the breakpoints; slopes from the argmax costs
  // at segment midpoints, where the active column of each row is unambiguous.
  auto value_at = [&](double lam) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = problem.cost.entries[i];
      double vmax = -kInf;
      for (std::size_t j = 0; j < problem.loss.size(); ++j) {
        if (!std::isfinite(c[j])) continue;
        vmax = std::max(vmax, problem.loss.values[j] - lam * c[j]);
      }
      total += w[i] * vmax;
    }
    return total;
  };
  auto slope_at = [&](double lam) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = problem.cost.entries[i];
      double vmax = -kInf, cbest = 0.0;
      for (std::size_t j = 0; j < problem.loss.size(); ++j) {
        if (!std::isfinite(c[j])) continue;
        const double v = problem.loss.values[j] - lam * c[j];
        if (v > vmax) {
          vmax = v;
          cbest = c[j];
        }
      }
      total -= w[i] * cbest;
    }
    return total;
  };

  PLConvexFunction out;
  out.breakpoints = std::move(merged);
  out.values.reserve(out.breakpoints.size());
  for (double b : out.breakpoints) out.values.push_back(value_at(b));
  out.slopes.reserve(out.breakpoints.size() - 1);
  for (std::size_t k = 0; k + 1 < out.breakpoints.size(); ++k)
    out.slopes.push_back(slope_at(0.5 * (out.breakpoints[k] + out.breakpoints[k + 1])));
  out.tail_slope = 0.0; // every row ends flat on its zero-cost column
  return out;
}

namespace {

DualResult dual_from_envelope(const PLConvexFunction& g, double rho) {
  DualResult out;
  out.curve.breakpoints = g.breakpoints;
  out.curve.values.reserve(g.values.size());
  for (std::size_t k = 0; k < g.values.size(); ++k)
    out.curve.values.push_back(rho * g.breakpoints[k] + g.values[k]);
  out.curve.slopes.reserve(g.slopes.size());
  for (double s : g.slopes) out.curve.slopes.push_back(rho + s);
  out.curve.tail_slope = rho + g.tail_slope;

  // Smallest breakpoint whose right slope is nonnegative; the tail slope is
  // rho >= 0, so the scan never needs to look past the last breakpoint.
  std::size_t k = 0;
  while (k < out.curve.slopes.size() && out.curve.slopes[k] < 0.0) ++k;
  out.lambda_star = out.curve.breakpoints[k];
  out.value = out.curve.values[k];
  out.radius_zero_warning = rho == 0.0;
  return out;
}

}  // namespace

DualResult dual_value(const DroProblem& problem) {
  return dual_from_envelope(envelope_G(problem), problem.radius);
}

std::vector<std::pair<double, double>> robust_curve(const DroProblem& problem,
                                                    const std::vector<double>& rho_grid) {
  for (std::size_t k = 0; k < rho_grid.size(); ++k) {
    if (!(rho_grid[k] > 0.0)) throw DroError(Errc::ShapeMismatch, "radius grid must be positive");
    if (k > 0 && rho_grid[k] < rho_grid[k - 1])
      throw DroError(Errc::ShapeMismatch, "radius grid must be sorted ascending");
  }
  const PLConvexFunction g = envelope_G(problem);
  std::vector<std::pair<double, double>> out;
  out.reserve(rho_grid.size());
  for (double rho : rho_grid) out.emplace_back(rho, dual_from_envelope(g, rho).value);
  return out;
}

}  // namespace dro
