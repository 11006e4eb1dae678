#include "dro/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "dro/envelope.hpp"

namespace dro {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) { throw DroError(code, what); }

double pos(double x) { return x > 0.0 ? x : 0.0; }

double power(double d, double p) {
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

void guard_exponent(double exponent) {
  if (exponent > 700.0)
    fail(Errc::OverflowEntropic,
         "exponential argument exceeds 700; rescale the losses or reduce theta");
}

/// Golden-section minimization of a unimodal function; stops when the
/// bracket width drops below 1e-9 * (1 + |alpha|).
template <typename F>
std::pair<double, double> golden_min(F&& f, double lo, double hi) {
  const double invphi = 0.6180339887498949;
  const double invphi2 = 1.0 - invphi;
  double a = lo, b = hi;
  double c = a + invphi2 * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-9 * (1.0 + std::max(std::abs(a), std::abs(b)))) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = a + invphi2 * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

}  // namespace

double RiskFamily::f_alpha(double alpha, double x) const {
  switch (kind) {
    case RiskKind::cvar:
      return alpha + pos(x - alpha) / (1.0 - beta);
    case RiskKind::variance:
      return (x - alpha) * (x - alpha);
    case RiskKind::mad:
      return std::abs(x - alpha);
    case RiskKind::entropic:
      return alpha + (std::exp(theta * (x - alpha)) - 1.0) / theta;
  }
  return 0.0;
}

RiskFamily RiskFamily::cvar(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) fail(Errc::ShapeMismatch, "tail level must lie in (0,1)");
  RiskFamily out;
  out.kind = RiskKind::cvar;
  out.beta = beta;
  return out;
}

RiskFamily RiskFamily::variance() {
  RiskFamily out;
  out.kind = RiskKind::variance;
  return out;
}

RiskFamily RiskFamily::mad() {
  RiskFamily out;
  out.kind = RiskKind::mad;
  return out;
}

RiskFamily RiskFamily::entropic(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    fail(Errc::ShapeMismatch, "risk aversion must be positive and finite");
  RiskFamily out;
  out.kind = RiskKind::entropic;
  out.theta = theta;
  return out;
}

PortfolioInstance make_portfolio_instance(ScalarSamples samples, double dual_norm_b, double p,
                                          double rho) {
  if (samples.atoms.size() != samples.weights.size())
    fail(Errc::ShapeMismatch, "sample atoms and weights differ in length");
  if (samples.atoms.empty()) fail(Errc::ShapeMismatch, "samples must be nonempty");
  ScalarSamples kept;
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double w = samples.weights[i];
    if (std::isnan(w) || w < 0.0) fail(Errc::NegativeWeight, "sample weights must be nonnegative");
    if (!std::isfinite(samples.atoms[i])) fail(Errc::ShapeMismatch, "sample atoms must be finite");
    if (w == 0.0) continue;
    kept.atoms.push_back(samples.atoms[i]);
    kept.weights.push_back(w);
    sum += w;
  }
  if (kept.atoms.empty()) fail(Errc::ShapeMismatch, "samples carry no mass");
  if (std::abs(sum - 1.0) > 1e-12)
    fail(Errc::WeightsNotNormalized, "sample weights must sum to one");
  if (sum != 1.0) {
    for (double& w : kept.weights) w /= sum;
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < kept.weights.size(); ++i) head += kept.weights[i];
    if (1.0 - head > 0.0) kept.weights.back() = 1.0 - head;
  }

  if (std::isnan(dual_norm_b) || dual_norm_b < 0.0)
    fail(Errc::ShapeMismatch, "dual norm of the exposure must be nonnegative");
  if (std::isnan(p) || p < 1.0) fail(Errc::InvalidP, "transport order must satisfy p >= 1");
  if (std::isnan(rho) || rho < 0.0) fail(Errc::ShapeMismatch, "radius must be nonnegative");

  PortfolioInstance out;
  out.samples = std::move(kept);
  out.dual_norm_b = dual_norm_b;
  out.p = p;
  out.rho = dual_norm_b * rho;
  return out;
}

NominalRisk nominal_risk(const ScalarSamples& samples, const RiskFamily& family) {
  const std::size_t n = samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return samples.atoms[a] < samples.atoms[b]; });

  NominalRisk out;
  switch (family.kind) {
    case RiskKind::cvar: {
      // Upper beta-quantile: smallest atom whose cumulative weight strictly
      // exceeds beta (with slack for accumulated dust).
      double cum = 0.0;
      out.alpha_star = samples.atoms[order.back()];
      for (std::size_t k : order) {
        cum += samples.weights[k];
        if (cum > family.beta + 1e-12) {
          out.alpha_star = samples.atoms[k];
          break;
        }
      }
      double tail = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        tail += samples.weights[i] * pos(samples.atoms[i] - out.alpha_star);
      out.value = out.alpha_star + tail / (1.0 - family.beta);
      return out;
    }
    case RiskKind::variance: {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += samples.weights[i] * samples.atoms[i];
      out.alpha_star = mean;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = samples.atoms[i] - mean;
        out.value += samples.weights[i] * d * d;
      }
      return out;
    }
    case RiskKind::mad: {
      double cum = 0.0;
      out.alpha_star = samples.atoms[order.back()];
      for (std::size_t k : order) {
        cum += samples.weights[k];
        if (cum >= 0.5 - 1e-12) { // lower median
          out.alpha_star = samples.atoms[k];
          break;
        }
      }
      for (std::size_t i = 0; i < n; ++i)
        out.value += samples.weights[i] * std::abs(samples.atoms[i] - out.alpha_star);
      return out;
    }
    case RiskKind::entropic: {
      double scale = 0.0;
      for (double x : samples.atoms) scale = std::max(scale, std::abs(x));
      guard_exponent(family.theta * scale);
      // log-sum-exp against the largest exponent
      const double m = family.theta * samples.atoms[order.back()];
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        acc += samples.weights[i] * std::exp(family.theta * samples.atoms[i] - m);
      out.value = (m + std::log(acc)) / family.theta;
      out.alpha_star = out.value;
      return out;
    }
  }
  return out;
}

double analytic_inner_sup(const RiskFamily& family, double alpha, double lambda, double xhat,
                          double p) {
  if (lambda < 0.0 || std::isnan(lambda))
    fail(Errc::ShapeMismatch, "penalty must be nonnegative");
  if (p == kInf)
    fail(Errc::UnsupportedCombination, "no penalized line supremum for the bottleneck order");
  if (std::isnan(p) || p < 1.0) fail(Errc::InvalidP, "transport order must satisfy p >= 1");

  switch (family.kind) {
    case RiskKind::cvar: {
      const double slope = 1.0 / (1.0 - family.beta);
      if (p == 1.0) return lambda >= slope ? alpha + pos(xhat - alpha) * slope : kInf;
      if (lambda == 0.0) return kInf;
      const double C = (p - 1.0) * std::pow(p * (1.0 - family.beta), -p / (p - 1.0));
      const double bump = C * (1.0 - family.beta) * std::pow(lambda, -1.0 / (p - 1.0));
      return alpha + pos(xhat - alpha + bump) * slope;
    }
    case RiskKind::variance: {
      if (p != 2.0)
        fail(Errc::UnsupportedCombination, "quadratic deviation has a line supremum only at order 2");
      if (lambda > 1.0) return lambda / (lambda - 1.0) * (xhat - alpha) * (xhat - alpha);
      if (lambda == 1.0 && xhat == alpha) return 0.0;
      return kInf;
    }
    case RiskKind::mad: {
      if (p == 1.0) return lambda >= 1.0 ? std::abs(xhat - alpha) : kInf;
      if (lambda == 0.0) return kInf;
      // Far-side maximizer x = xhat +/- t with t = (lambda p)^{-1/(p-1)}.
      const double D = (p - 1.0) * std::pow(p, -p / (p - 1.0));
      return std::abs(xhat - alpha) + D * std::pow(lambda, -1.0 / (p - 1.0));
    }
    case RiskKind::entropic:
      fail(Errc::UnsupportedCombination,
           "exponential growth beats every finite-order penalty; the supremum diverges");
  }
  return kInf;
}

namespace {

double cvar_of(const ScalarSamples& samples, double beta) {
  return nominal_risk(samples, RiskFamily::cvar(beta)).value;
}

/// Candidate bracket guaranteed to contain every outer minimizer, padded so
/// the golden-section result stays strictly interior.
std::pair<double, double> alpha_bracket(const ScalarSamples& samples, const RiskFamily& family,
                                        double rho_eff) {
  double lo_atom = kInf, hi_atom = -kInf;
  for (double x : samples.atoms) {
    lo_atom = std::min(lo_atom, x);
    hi_atom = std::max(hi_atom, x);
  }
  const double span = hi_atom - lo_atom;
  const double pad = 0.125 * (1.0 + span + rho_eff);

  if (family.kind == RiskKind::cvar || family.kind == RiskKind::mad) {
    const double beta = family.kind == RiskKind::mad ? 0.5 : family.beta;
    const double coeff = std::max(1.0 / beta, 1.0 / (1.0 - beta));
    ScalarSamples negated = samples;
    for (double& x : negated.atoms) x = -x;
    const double lo = -cvar_of(negated, 1.0 - beta) - coeff * rho_eff - pad;
    const double hi = cvar_of(samples, beta) + coeff * rho_eff + pad;
    return {lo, hi};
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    mean += samples.weights[i] * samples.atoms[i];
  return {mean - span - rho_eff - pad, mean + span + rho_eff + pad};
}

/// Inner objective min over the penalty for the continuum modes with a
/// finite order. Returns {value, lambda_star}.
std::pair<double, double> line_inner_min(const ScalarSamples& samples, const RiskFamily& family,
                                         double alpha, double rho_eff, double p) {
  const std::size_t n = samples.size();
  switch (family.kind) {
    case RiskKind::cvar: {
      const double slope = 1.0 / (1.0 - family.beta);
      if (p == 1.0) {
        // The supremum is flat in the penalty above the slope threshold, so
        // the objective is minimized exactly at it.
        double tail = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          tail += samples.weights[i] * pos(samples.atoms[i] - alpha);
        return {slope * rho_eff + alpha + slope * tail, slope};
      }
      // Unimodal in log(lambda); the bracket is centered on the stationary
      // point of the all-atoms-active objective, 1 / (p (1-beta) rho^{p-1}),
      // and is wide enough for any clipped subset of atoms.
      const double budget = power(rho_eff, p);
      auto objective = [&](double lam) {
        double total = lam * budget;
        for (std::size_t i = 0; i < n; ++i)
          total += samples.weights[i] *
                   analytic_inner_sup(family, alpha, lam, samples.atoms[i], p);
        return total;
      };
      const double center = std::log(1.0 / (p * (1.0 - family.beta) * power(rho_eff, p - 1.0)));
      auto [t_star, value] = golden_min([&](double t) { return objective(std::exp(t)); },
                                        center - 40.0, center + 40.0);
      return {value, std::exp(t_star)};
    }
    case RiskKind::mad: {
      // Exact for every finite order: the optimal penalty spends exactly the
      // radius, leaving the deviation term untouched.
      double dev = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        dev += samples.weights[i] * std::abs(samples.atoms[i] - alpha);
      const double lam = p == 1.0 ? 1.0 : 1.0 / (p * power(rho_eff, p - 1.0));
      return {rho_eff + dev, lam};
    }
    case RiskKind::variance: {
      // Order 2 only (callers rule everything else out): with S = E(X-a)^2
      // and budget rho^2, min over penalties is (sqrt(S) + rho)^2.
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = samples.atoms[i] - alpha;
        s += samples.weights[i] * d * d;
      }
      const double root = std::sqrt(s) + rho_eff;
      const double lam = s > 0.0 && rho_eff > 0.0 ? 1.0 + std::sqrt(s) / rho_eff : 1.0;
      return {root * root, lam};
    }
    case RiskKind::entropic:
      break;
  }
  fail(Errc::UnsupportedCombination, "no continuum inner minimization for this pair");
}

/// Supremum of f_alpha over the bottleneck ball around one atom.
double ball_sup(const RiskFamily& family, double alpha, double xhat, double rho_eff) {
  switch (family.kind) {
    case RiskKind::cvar:
      return alpha + pos(xhat + rho_eff - alpha) / (1.0 - family.beta);
    case RiskKind::variance: {
      const double r = std::abs(xhat - alpha) + rho_eff;
      return r * r;
    }
    case RiskKind::mad:
      return std::abs(xhat - alpha) + rho_eff;
    case RiskKind::entropic:
      return alpha + (std::exp(family.theta * (xhat + rho_eff - alpha)) - 1.0) / family.theta;
  }
  return 0.0;
}

std::vector<double> build_grid(const ScalarSamples& samples, double rho_eff, const GridSpec& grid,
                               bool include_shifted) {
  double lo = kInf, hi = -kInf;
  for (double x : samples.atoms) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::vector<double> pts = samples.atoms;
  if (include_shifted)
    for (double x : samples.atoms) pts.push_back(x + rho_eff);
  const double start = lo - grid.span, stop = hi + grid.span;
  for (double x = start; x <= stop + 0.5 * grid.spacing; x += grid.spacing) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

/// Penalty dual restricted to a candidate grid: exact piecewise-linear
/// minimization of lambda * budget + sum_i w_i Phi_i(lambda).
std::pair<double, double> grid_dual(const ScalarSamples& samples, const std::vector<double>& pts,
                                    const std::vector<double>& losses, double p, double budget) {
  const std::size_t n = samples.size();
  LossVector loss{losses};
  std::vector<PLConvexFunction> phi(n);
  std::vector<double> bps;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> cost_row(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j)
      cost_row[j] = power(std::abs(pts[j] - samples.atoms[i]), p);
    phi[i] = row_envelope(loss, cost_row);
    bps.insert(bps.end(), phi[i].breakpoints.begin(), phi[i].breakpoints.end());
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

  auto slope = [&](double lam) {
    double s = budget;
    for (std::size_t i = 0; i < n; ++i) s += samples.weights[i] * phi[i].slope_after(lam);
    return s;
  };
  // First breakpoint with nonnegative right slope; the slopes are
  // nondecreasing and the last one equals the budget, so it exists.
  std::size_t lo = 0, hi = bps.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (slope(bps[mid]) >= 0.0)
      hi = mid;
    else
      lo = mid + 1;
  }
  const double lam = bps[lo];
  double value = lam * budget;
  for (std::size_t i = 0; i < n; ++i) value += samples.weights[i] * phi[i].eval(lam);
  return {value, lam};
}

struct GridOutcome {
  double value = 0.0;
  double alpha_star = 0.0;
  double lambda_star = 0.0;
};

GridOutcome evaluate_on_grid(const ScalarSamples& samples, const RiskFamily& family, double rho,
                             double p, RobustMode mode, const GridSpec& grid) {
  const std::vector<double> pts =
      build_grid(samples, rho, grid, /*include_shifted=*/mode == RobustMode::linf_grid);
  GridOutcome out;
  out.value = kInf;
  std::vector<double> losses(pts.size());
  for (double a : pts) {
    double value, lam = 0.0;
    if (mode == RobustMode::wp_grid) {
      for (std::size_t j = 0; j < pts.size(); ++j) losses[j] = family.f_alpha(a, pts[j]);
      auto [v, l] = grid_dual(samples, pts, losses, p, power(rho, p));
      value = v;
      lam = l;
    } else {
      const double slack = 1e-12 * (1.0 + rho);
      value = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        double row_best = -kInf;
        for (double g : pts) {
          if (std::abs(g - samples.atoms[i]) <= rho + slack)
            row_best = std::max(row_best, family.f_alpha(a, g));
        }
        value += samples.weights[i] * row_best;
      }
    }
    if (value < out.value) {
      out.value = value;
      out.alpha_star = a;
      out.lambda_star = lam;
    }
  }
  return out;
}

DivergenceCertificate translation_certificate(const ScalarSamples& samples,
                                              const RiskFamily& family, double rho_eff,
                                              double p) {
  DivergenceCertificate cert;
  cert.note =
      "mixture (1-eps) nominal + eps nominal-shifted-by-M with M = radius * eps^(-1/p); "
      "each member costs exactly radius^p to reach, yet its risk is unbounded";
  // Shrink eps until the witness value clearly dominates the first one; for
  // small radii the exponential term only takes over deep into the ladder.
  double eps = 1e-1;
  for (int rung = 0; rung < 60; ++rung, eps /= 10.0) {
    const double shift = rho_eff * std::pow(eps, -1.0 / p);
    cert.epsilons.push_back(eps);
    cert.shifts.push_back(shift);
    if (family.kind == RiskKind::variance) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        mean += samples.weights[i] * samples.atoms[i];
        sq += samples.weights[i] * samples.atoms[i] * samples.atoms[i];
      }
      const double mixed_mean = mean + eps * shift;
      const double mixed_sq = sq + eps * (2.0 * shift * mean + shift * shift);
      cert.risk_values.push_back(mixed_sq - mixed_mean * mixed_mean);
    } else {
      // Entropic: theta^{-1} [ log E e^{theta X} + log((1-eps) + eps e^{theta M}) ],
      // evaluated in log space so the blow-up itself cannot overflow.
      const double theta = family.theta;
      double scale = 0.0;
      for (double x : samples.atoms) scale = std::max(scale, std::abs(x));
      guard_exponent(theta * scale);
      double m = -kInf;
      for (double x : samples.atoms) m = std::max(m, theta * x);
      double acc = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i)
        acc += samples.weights[i] * std::exp(theta * samples.atoms[i] - m);
      const double log_mgf = m + std::log(acc);
      const double a = std::log1p(-eps), b = std::log(eps) + theta * shift;
      const double log_mix = std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
      cert.risk_values.push_back((log_mgf + log_mix) / theta);
    }
    if (cert.risk_values.size() >= 4 &&
        cert.risk_values.back() > cert.risk_values.front() + 10.0)
      break;
  }
  return cert;
}

}  // namespace

double closed_form_robust_risk(const PortfolioInstance& instance, const RiskFamily& family) {
  const double rho = instance.rho;
  const double p = instance.p;
  switch (family.kind) {
    case RiskKind::cvar: {
      const double expo = p == kInf ? 0.0 : 1.0 / p;
      return nominal_risk(instance.samples, family).value +
             rho * std::pow(1.0 - family.beta, -expo);
    }
    case RiskKind::variance: {
      if (p == 2.0) {
        const double sd = std::sqrt(nominal_risk(instance.samples, family).value);
        return (sd + rho) * (sd + rho);
      }
      if (p == kInf) {
        auto [lo, hi] = alpha_bracket(instance.samples, family, rho);
        auto objective = [&](double a) {
          double total = 0.0;
          for (std::size_t i = 0; i < instance.samples.size(); ++i)
            total += instance.samples.weights[i] * ball_sup(family, a, instance.samples.atoms[i], rho);
          return total;
        };
        return golden_min(objective, lo, hi).second;
      }
      if (p < 2.0 && rho > 0.0) return kInf;
      if (p < 2.0) return nominal_risk(instance.samples, family).value; // zero radius
      fail(Errc::UnsupportedCombination, "no closed form for quadratic deviation above order 2");
    }
    case RiskKind::mad:
      return nominal_risk(instance.samples, family).value + rho;
    case RiskKind::entropic: {
      if (p == kInf) return nominal_risk(instance.samples, family).value + rho;
      if (rho > 0.0) return kInf;
      return nominal_risk(instance.samples, family).value;
    }
  }
  fail(Errc::UnsupportedCombination, "unknown family");
}

RobustRiskResult robust_risk_generic(const PortfolioInstance& instance, const RiskFamily& family,
                                     RobustMode mode, const GridSpec& grid) {
  const ScalarSamples& samples = instance.samples;
  const double rho = instance.rho;
  const double p = instance.p;

  RobustRiskResult out;
  if (rho == 0.0) {
    const NominalRisk nom = nominal_risk(samples, family);
    out.value = nom.value;
    out.alpha_star = nom.alpha_star;
    return out;
  }

  // Combinations whose worst case is unbounded whenever the radius is
  // positive; the ball mode bounds every move and stays finite.
  const bool divergent = mode != RobustMode::linf_grid &&
                         ((family.kind == RiskKind::variance && p < 2.0) ||
                          (family.kind == RiskKind::entropic && p != kInf));
  if (divergent) {
    out.value = kInf;
    if (mode == RobustMode::analytic_line) {
      out.divergence = translation_certificate(samples, family, rho, p);
    } else {
      // Grid evidence: rerun on doubling spans with a constant point count
      // until the value passes 1e12.
      DivergenceCertificate cert;
      cert.note = "candidate-grid value under domain widening; spans double, spacing scales";
      GridSpec wide = grid;
      double scale_max = 0.0;
      for (double x : samples.atoms) scale_max = std::max(scale_max, std::abs(x));
      for (int k = 0; k < 60; ++k) {
        if (family.kind == RiskKind::entropic && family.theta * (wide.span + scale_max) > 690.0)
          break;
        wide.spacing = 2.0 * wide.span / 128.0;
        const GridOutcome probe = evaluate_on_grid(samples, family, rho, p, mode, wide);
        cert.epsilons.push_back(wide.spacing);
        cert.shifts.push_back(wide.span);
        cert.risk_values.push_back(probe.value);
        if (probe.value > 1e12) break;
        wide.span *= 2.0;
      }
      out.divergence = std::move(cert);
    }
    return out;
  }

  if (mode == RobustMode::analytic_line) {
    auto [lo, hi] = alpha_bracket(samples, family, rho);
    if (family.kind == RiskKind::entropic) {
      double reach = 0.0;
      for (double x : samples.atoms) reach = std::max(reach, std::abs(x) + rho);
      guard_exponent(family.theta * (reach + std::max(std::abs(lo), std::abs(hi))));
    }
    if (p == kInf) {
      auto objective = [&](double a) {
        double total = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i)
          total += samples.weights[i] * ball_sup(family, a, samples.atoms[i], rho);
        return total;
      };
      auto [a_star, value] = golden_min(objective, lo, hi);
      out.value = value;
      out.alpha_star = a_star;
      return out;
    }
    if (family.kind == RiskKind::variance && p != 2.0)
      fail(Errc::UnsupportedCombination,
           "quadratic deviation has a continuum treatment only at order 2");
    auto objective = [&](double a) { return line_inner_min(samples, family, a, rho, p).first; };
    auto [a_star, value] = golden_min(objective, lo, hi);
    out.value = value;
    out.alpha_star = a_star;
    out.lambda_star = line_inner_min(samples, family, a_star, rho, p).second;
    return out;
  }

  // Discrete candidate grids.
  if (mode == RobustMode::wp_grid && p == kInf)
    fail(Errc::UnsupportedCombination, "grid mode needs a finite order; use the ball mode");
  if (family.kind == RiskKind::entropic) {
    double reach = 0.0;
    for (double x : samples.atoms) reach = std::max(reach, std::abs(x));
    guard_exponent(family.theta * 2.0 * (reach + grid.span + rho));
  }
  const GridOutcome got = evaluate_on_grid(samples, family, rho, p, mode, grid);
  out.value = got.value;
  out.alpha_star = got.alpha_star;
  out.lambda_star = got.lambda_star;
  return out;
}

}  // namespace dro
