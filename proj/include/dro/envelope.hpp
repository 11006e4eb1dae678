#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "dro/problem.hpp"

namespace dro {

/// Piecewise-linear convex function on [0, inf), stored as breakpoints
/// (strictly increasing, starting at 0), values at the breakpoints, segment
/// slopes between consecutive breakpoints, and the slope of the final
/// unbounded segment. Convexity means the slope sequence is nondecreasing.
struct PLConvexFunction {
  std::vector<double> breakpoints;
  std::vector<double> values;
  std::vector<double> slopes;
  double tail_slope = 0.0;

  double eval(double x) const;
  /// Right slope at x (tail_slope at or beyond the last breakpoint).
  double slope_after(double x) const;
};

/// Exact upper envelope over candidate columns of the lines
/// lambda -> loss[j] - lambda * cost_row[j], restricted to lambda >= 0.
/// Columns with infinite cost are excluded entirely: an unreachable point
/// never participates, not even at lambda = 0. The final segment is flat
/// (slope exactly 0) because the zero-cost diagonal column survives.
/// `lambda_max_hint` is an advisory preallocation hint; the result is exact
/// on all of [0, inf) regardless of it.
PLConvexFunction row_envelope(const LossVector& loss,
                              const std::vector<double>& cost_row,
                              double lambda_max_hint = 0.0);

/// Weighted sum of the per-row envelopes on the union of their breakpoints:
/// the expected inner supremum as a function of the transport penalty.
/// Nonincreasing, convex, bounded below by the nominal expected loss.
PLConvexFunction envelope_G(const DroProblem& problem);

/// Minimizer of lambda -> lambda * radius + G(lambda) together with the
/// minimized objective curve. When a whole segment is flat at the minimum,
/// the smallest minimizing lambda is reported.
struct DualResult {
  double value = 0.0;
  double lambda_star = 0.0;
  PLConvexFunction curve;
  /// Set when radius == 0: the hard-ball value at radius zero is reported by
  /// the primal; the penalized form can overshoot it in the limit of
  /// shrinking balls, so the caller is warned.
  bool radius_zero_warning = false;
};

/// Exact minimization of the piecewise-linear objective by scanning for the
/// slope sign change. The value equals the worst-case expected loss for
/// every positive radius on finite instances.
DualResult dual_value(const DroProblem& problem);

/// dual_value evaluated on a positive, sorted radius grid. The output is
/// nondecreasing and midpoint-concave in the radius.
std::vector<std::pair<double, double>> robust_curve(const DroProblem& problem,
                                                    const std::vector<double>& rho_grid);

}  // namespace dro
