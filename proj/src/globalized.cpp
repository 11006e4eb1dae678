#include "dro/globalized.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dro/envelope.hpp"

namespace dro {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) { throw DroError(code, what); }

// Value and smallest minimizer of lambda -> lambda * rho + sum_i w_i phi_i(lambda)
// with every phi_i flat-tailed, so the objective eventually has slope rho > 0
// and the minimum sits at a breakpoint.
struct InnerMin {
  double value = 0.0;
  double lambda_star = 0.0;
};

InnerMin minimize_over_lambda(const std::vector<PLConvexFunction>& phis,
                              const std::vector<double>& weights, double rho) {
  std::vector<double> grid;
  for (const auto& phi : phis)
    grid.insert(grid.end(), phi.breakpoints.begin(), phi.breakpoints.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double lambda_star = grid.back();
  for (double b : grid) {
    double slope = rho;
    for (std::size_t i = 0; i < phis.size(); ++i) slope += weights[i] * phis[i].slope_after(b);
    if (slope >= 0.0) {
      lambda_star = b;
      break;
    }
  }
  double value = lambda_star * rho;
  for (std::size_t i = 0; i < phis.size(); ++i) value += weights[i] * phis[i].eval(lambda_star);
  return {value, lambda_star};
}

// Per-row envelope over (intermediate, final) pairs at a fixed outer
// multiplier: lines lambda -> f_j - mu * outer(i,k) - lambda * inner(k,j).
// Pairs with an infinite cost on either layer never participate.
PLConvexFunction pair_envelope(const GlobalizedInstance& inst, std::size_t row, double mu) {
  const std::size_t m = inst.base.loss.size();
  LossVector flat_loss;
  std::vector<double> flat_cost;
  for (std::size_t k = 0; k < m; ++k) {
    const double out = inst.base.cost.entries[row][k];
    if (!(out < kInf)) continue;
    for (std::size_t j = 0; j < m; ++j) {
      const double in = inst.inner_cost.entries[k][j];
      if (!(in < kInf)) continue;
      flat_loss.values.push_back(inst.base.loss.values[j] - mu * out);
      flat_cost.push_back(in);
    }
  }
  return row_envelope(flat_loss, flat_cost);
}

struct MuEval {
  double total = 0.0;
  double lambda_star = 0.0;
};

MuEval eval_at_mu(const GlobalizedInstance& inst, double mu) {
  const std::size_t n = inst.base.nominal.size();
  std::vector<PLConvexFunction> phis;
  phis.reserve(n);
  for (std::size_t i = 0; i < n; ++i) phis.push_back(pair_envelope(inst, i, mu));
  const InnerMin inner = minimize_over_lambda(phis, inst.base.nominal.weights, inst.base.radius);
  return {mu * inst.theta + inner.value, inner.lambda_star};
}

// True when the outer rows coincide with the inner rows at the matched
// candidates and the shared matrix obeys the triangle inequality, so moving
// through an intermediate never undercuts the direct cost and the two budgets
// merge into one.
bool collapses_to_single_layer(const GlobalizedInstance& inst) {
  const auto& base = inst.base.cost;
  const auto& in = inst.inner_cost;
  const std::size_t m = in.rows();
  for (std::size_t i = 0; i < base.rows(); ++i) {
    const std::vector<double>& shared = in.entries[base.diagonal_map[i]];
    for (std::size_t j = 0; j < m; ++j)
      if (base.entries[i][j] != shared[j]) return false;
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      if (!(in.entries[a][b] < kInf)) continue;
      for (std::size_t c = 0; c < m; ++c) {
        if (!(in.entries[b][c] < kInf)) continue;
        const double via = in.entries[a][b] + in.entries[b][c];
        if (in.entries[a][c] > via + 1e-12 * (1.0 + via)) return false;
      }
    }
  return true;
}

}  // namespace

GlobalizedInstance validate_globalized(GlobalizedInstance instance) {
  instance.base = validate_problem(std::move(instance.base));
  const std::size_t m = instance.base.loss.size();
  const auto& in = instance.inner_cost;
  if (in.rows() != m || in.diagonal_map.size() != m)
    fail(Errc::ShapeMismatch, "candidate-by-candidate cost must be square over the candidates");
  for (std::size_t k = 0; k < m; ++k) {
    if (in.entries[k].size() != m)
      fail(Errc::ShapeMismatch, "candidate-by-candidate cost must be square over the candidates");
    for (double c : in.entries[k])
      if (std::isnan(c) || c < 0.0) fail(Errc::NegativeCost, "costs must be nonnegative");
    if (in.diagonal_map[k] >= m || in.entries[k][in.diagonal_map[k]] != 0.0)
      fail(Errc::MissingDiagonalZero, "every candidate needs a zero-cost match to itself");
  }
  if (std::isnan(instance.theta) || instance.theta < 0.0 || !(instance.theta < kInf))
    fail(Errc::ShapeMismatch, "outer budget must be finite and nonnegative");
  return instance;
}

double globalized_soft(const GlobalizedInstance& instance, double lambda, double mu) {
  if (!(lambda >= 0.0) || !(mu >= 0.0))
    fail(Errc::ShapeMismatch, "multipliers must be nonnegative");
  const std::size_t m = instance.base.loss.size();
  const std::size_t n = instance.base.nominal.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = -kInf;
    for (std::size_t k = 0; k < m; ++k) {
      const double out = instance.base.cost.entries[i][k];
      if (!(out < kInf)) continue;
      for (std::size_t j = 0; j < m; ++j) {
        const double in = instance.inner_cost.entries[k][j];
        if (!(in < kInf)) continue;
        const double v = instance.base.loss.values[j] - lambda * in - mu * out;
        if (v > best) best = v;
      }
    }
    total += instance.base.nominal.weights[i] * best;
  }
  return total;
}

GlobalizedResult globalized_value(const GlobalizedInstance& instance) {
  const std::size_t m = instance.base.loss.size();
  const std::size_t n = instance.base.nominal.size();

  if (instance.base.radius == 0.0) {
    // Zero inner budget: each intermediate only reaches its zero-cost finals,
    // leaving a single layer over the outer cost at budget theta.
    DroProblem outer = instance.base;
    outer.radius = instance.theta;
    for (std::size_t k = 0; k < m; ++k) {
      double best = -kInf;
      for (std::size_t j = 0; j < m; ++j)
        if (instance.inner_cost.entries[k][j] == 0.0 && instance.base.loss.values[j] > best)
          best = instance.base.loss.values[j];
      outer.loss.values[k] = best;
    }
    const DualResult d = dual_value(outer);
    return {d.value, kInf, d.lambda_star};
  }

  if (instance.theta == 0.0) {
    // Zero outer budget: mass stays on the matched intermediates and only the
    // inner layer moves it, a single layer over the inner rows at the support.
    DroProblem inner = instance.base;
    inner.cost.entries.clear();
    inner.cost.diagonal_map.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = instance.base.cost.diagonal_map[i];
      inner.cost.entries.push_back(instance.inner_cost.entries[k]);
      inner.cost.diagonal_map.push_back(instance.inner_cost.diagonal_map[k]);
    }
    const DualResult d = dual_value(inner);
    return {d.value, d.lambda_star, kInf};
  }

  if (collapses_to_single_layer(instance)) {
    DroProblem merged = instance.base;
    merged.radius = instance.base.radius + instance.theta;
    const DualResult d = dual_value(merged);
    return {d.value, d.lambda_star, d.lambda_star};
  }

  // The marginal mu -> min_lambda(total) is convex: the joint objective is a
  // weighted sum of upper envelopes of affine functions of (lambda, mu) plus
  // a linear term, and partial minimization preserves convexity. Every pair
  // cost is bounded below by the matched-candidate chain of zero costs, so
  // the total exceeds mu * theta + E[f at the matched candidates] and the
  // minimizing mu cannot outrun the value at mu = 0.
  double floor_value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = instance.base.cost.diagonal_map[i];
    const std::size_t j = instance.inner_cost.diagonal_map[k];
    floor_value += instance.base.nominal.weights[i] * instance.base.loss.values[j];
  }
  const MuEval at_zero = eval_at_mu(instance, 0.0);
  double hi = std::max(1.0, (at_zero.total - floor_value) / instance.theta + 1.0);

  const double invphi = 0.6180339887498949;
  double a = 0.0, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = eval_at_mu(instance, x1).total;
  double f2 = eval_at_mu(instance, x2).total;
  while (b - a > 1e-10 * (1.0 + hi)) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = eval_at_mu(instance, x1).total;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = eval_at_mu(instance, x2).total;
    }
  }
  double mu_star = f1 < f2 ? x1 : x2;
  MuEval best = eval_at_mu(instance, mu_star);
  if (at_zero.total <= best.total) {
    mu_star = 0.0;
    best = at_zero;
  }
  return {best.total, best.lambda_star, mu_star};
}

}  // namespace dro
