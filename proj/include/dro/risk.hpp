#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dro/problem.hpp"

namespace dro {

enum class RiskKind { cvar, variance, mad, entropic };

/// Parametric loss family f_alpha whose infimum over alpha realizes the risk
/// measure. Evaluation rules:
///   cvar:     alpha + (x - alpha)_+ / (1 - beta)   (tail level beta in (0,1))
///   variance: (x - alpha)^2
///   mad:      |x - alpha|
///   entropic: alpha + (exp(theta (x - alpha)) - 1) / theta   (theta > 0)
/// Each rule is convex and lower semi-continuous in alpha for every x.
struct RiskFamily {
  RiskKind kind = RiskKind::cvar;
  double beta = 0.5;
  double theta = 1.0;

  double f_alpha(double alpha, double x) const;

  static RiskFamily cvar(double beta);
  static RiskFamily variance();
  static RiskFamily mad();
  static RiskFamily entropic(double theta);
};

/// Weighted scalar samples; weights positive and summing to one.
struct ScalarSamples {
  std::vector<double> atoms;
  std::vector<double> weights;

  std::size_t size() const { return atoms.size(); }
};

/// Scalar risk instance after the one-dimensional reduction of a linear
/// portfolio: atoms hold the aggregated losses and `rho` already includes
/// the dual-norm scaling applied at construction.
struct PortfolioInstance {
  ScalarSamples samples;
  double dual_norm_b = 1.0;
  double p = 1.0;   // transport order; kInf for the bottleneck ball
  double rho = 0.0; // effective radius = dual_norm_b * input radius
};

/// Validates the samples, requires dual_norm_b >= 0 and p >= 1 (or kInf),
/// and scales the radius by the dual norm.
PortfolioInstance make_portfolio_instance(ScalarSamples samples, double dual_norm_b,
                                          double p, double rho);

struct NominalRisk {
  double value = 0.0;
  double alpha_star = 0.0;
};

/// Exact minimization of alpha -> E[f_alpha(X)] under the samples:
///   cvar:     alpha* = upper beta-quantile, value = tail average
///   variance: alpha* = mean, value = variance
///   mad:      alpha* = lower median, value = mean absolute deviation
///   entropic: alpha* = log(E exp(theta X)) / theta, value = alpha*
/// Throws OverflowEntropic when theta * max|atom| > 700.
NominalRisk nominal_risk(const ScalarSamples& samples, const RiskFamily& family);

enum class RobustMode {
  /// Continuum candidate set on the real line, analytic inner suprema.
  analytic_line,
  /// Discrete candidate grid, inner value via the penalty-dual engine.
  wp_grid,
  /// Discrete candidate grid, inner value via the bottleneck ball.
  linf_grid,
};

/// Candidate grid for the discrete modes: the sample atoms plus a uniform
/// grid of the given spacing covering [min - span, max + span].
struct GridSpec {
  double spacing = 0.01;
  double span = 3.0;
};

/// Witness family certifying divergence to +inf: mixtures that keep the
/// transport budget while pushing a vanishing mass to distance
/// rho * eps^{-1/p}, whose risk grows without bound.
struct DivergenceCertificate {
  std::vector<double> epsilons;
  std::vector<double> shifts;
  std::vector<double> risk_values;
  std::string note;
};

struct RobustRiskResult {
  double value = 0.0; // +inf when the instance diverges
  double alpha_star = 0.0;
  double lambda_star = 0.0; // transport penalty at the optimum (analytic modes with p < inf)
  std::optional<DivergenceCertificate> divergence;
};

/// Worst-case risk over the transport ball: outer golden-section over alpha
/// on a bracket that provably contains every minimizer, inner value per the
/// selected mode. Diverging combinations -- (variance, p < 2) and
/// (entropic, p < inf) -- return +inf with a witness certificate.
RobustRiskResult robust_risk_generic(const PortfolioInstance& instance,
                                     const RiskFamily& family, RobustMode mode,
                                     const GridSpec& grid = GridSpec{});

/// Exact continuum supremum sup_x { f_alpha(x) - lambda |xhat - x|^p } on
/// the real line; +inf is returned as a sentinel. Throws
/// UnsupportedCombination for pairs without a listed analytic form.
double analytic_inner_sup(const RiskFamily& family, double alpha, double lambda,
                          double xhat, double p);

/// Reference closed forms for the four families:
///   cvar, p in [1, inf]: CVaR + rho * (1 - beta)^{-1/p}
///   variance, p = 2:     (sqrt(Var) + rho)^2
///   variance, p = inf:   min_alpha E[(|X - alpha| + rho)^2]
///   mad, p in [1, inf]:  MAD + rho
///   entropic, p = inf:   Ent + rho
/// (variance, p < 2) and (entropic, p < inf) return +inf; other pairs throw
/// UnsupportedCombination. `rho` here is the instance's effective radius.
double closed_form_robust_risk(const PortfolioInstance& instance, const RiskFamily& family);

}  // namespace dro
