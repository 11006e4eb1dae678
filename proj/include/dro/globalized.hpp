#pragma once

#include "dro/problem.hpp"

namespace dro {

/// Two-layer ambiguity instance. The worst case routes mass twice: first
/// from a nominal atom to an intermediate candidate (cost base.cost, budget
/// theta), then from the intermediate to a final candidate (candidate-by-
/// candidate inner_cost, budget base.radius). Each layer carries its own
/// multiplier, and the expectation's inner supremum ranges over pairs.
struct GlobalizedInstance {
  DroProblem base;
  CostMatrix inner_cost; // candidate x candidate, paired with base.radius
  double theta = 0.0;    // outer budget, paired with base.cost
};

GlobalizedInstance validate_globalized(GlobalizedInstance instance);

struct GlobalizedResult {
  double value = 0.0;
  double lambda_star = 0.0; // multiplier on the inner layer
  double mu_star = 0.0;     // multiplier on the outer layer
};

/// Minimization over both multipliers of
///   lambda * rho + mu * theta
///     + sum_i w_i max_{k,j} { f_j - lambda * inner(k,j) - mu * outer(i,k) }.
/// For each fixed mu the inner problem is an exact piecewise-linear
/// minimization in lambda; the outer marginal in mu inherits convexity from
/// the joint objective and is minimized by golden section on a bracket that
/// provably contains the optimum. When both layers share one cost matrix
/// that satisfies the triangle inequality the problem collapses to the
/// single-layer dual at radius rho + theta, which is used directly.
GlobalizedResult globalized_value(const GlobalizedInstance& instance);

/// Doubly penalized value at fixed multipliers: the per-row maximum over
/// (intermediate, final) pairs, weighted by the nominal distribution.
double globalized_soft(const GlobalizedInstance& instance, double lambda, double mu);

}  // namespace dro
