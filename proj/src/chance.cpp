#include "dro/chance.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dro {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) { throw DroError(code, what); }

double pos(double x) { return x > 0.0 ? x : 0.0; }

double power(double d, double p) {
  if (p == 1.0) return d;
  if (p == 2.0) return d * d;
  return std::pow(d, p);
}

}  // namespace

ChanceInstance validate_chance(ChanceInstance instance) {
  if (instance.weights.size() != instance.unsafe_distance.size())
    fail(Errc::ShapeMismatch, "weights and distances differ in length");
  if (instance.weights.empty()) fail(Errc::ShapeMismatch, "instance must carry at least one atom");

  ChanceInstance out = instance;
  out.weights.clear();
  out.unsafe_distance.clear();
  double sum = 0.0;
  for (std::size_t i = 0; i < instance.weights.size(); ++i) {
    const double w = instance.weights[i];
    const double d = instance.unsafe_distance[i];
    if (std::isnan(w) || w < 0.0) fail(Errc::NegativeWeight, "weights must be nonnegative");
    if (std::isnan(d) || d < 0.0) fail(Errc::NegativeCost, "distances must be nonnegative");
    if (w == 0.0) continue;
    out.weights.push_back(w);
    out.unsafe_distance.push_back(d);
    sum += w;
  }
  if (out.weights.empty()) fail(Errc::ShapeMismatch, "weights carry no mass");
  if (std::abs(sum - 1.0) > 1e-12) fail(Errc::WeightsNotNormalized, "weights must sum to one");
  if (sum != 1.0) {
    for (double& w : out.weights) w /= sum;
    // Pin the tail weight so renormalizing twice is a no-op; serialization
    // round-trips re-validate the same instance.
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < out.weights.size(); ++i) head += out.weights[i];
    if (1.0 - head > 0.0) out.weights.back() = 1.0 - head;
  }

  if (std::isnan(out.p) || out.p < 1.0) fail(Errc::InvalidP, "transport order must satisfy p >= 1");
  if (std::isnan(out.rho) || out.rho < 0.0) fail(Errc::ShapeMismatch, "radius must be nonnegative");
  if (!(out.beta > 0.0 && out.beta < 1.0))
    fail(Errc::ShapeMismatch, "violation tolerance must lie in (0,1)");
  return out;
}

ChanceValue chance_robust_value(const ChanceInstance& instance) {
  if (instance.p == kInf)
    fail(Errc::UnsupportedCombination, "the bottleneck order has its own routine");
  const std::size_t n = instance.weights.size();
  const double budget = power(instance.rho, instance.p);

  // Objective lambda * rho^p + sum_i w_i (1 - lambda d_i^p)_+ is convex and
  // piecewise linear with breakpoints at lambda = d_i^{-p}; atoms already in
  // the unsafe set (d = 0) contribute a constant 1.
  std::vector<double> candidates{0.0};
  for (double d : instance.unsafe_distance)
    if (d > 0.0) candidates.push_back(1.0 / power(d, instance.p));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto objective = [&](double lam) {
    double total = lam * budget;
    for (std::size_t i = 0; i < n; ++i)
      total += instance.weights[i] * pos(1.0 - lam * power(instance.unsafe_distance[i], instance.p));
    return total;
  };

  ChanceValue out;
  out.value = kInf;
  for (double lam : candidates) {
    const double v = objective(lam);
    // Keep the smallest minimizing penalty: a later candidate must beat the
    // incumbent by more than float dust to displace it.
    if (v < out.value - 1e-9 * (1.0 + std::abs(v))) {
      out.value = v;
      out.lambda_star = lam;
    }
  }
  out.radius_zero_warning = instance.rho == 0.0;
  return out;
}

bool chance_feasible(const ChanceInstance& instance) {
  if (instance.p == kInf) return chance_linf(instance).feasible;
  const std::size_t n = instance.weights.size();

  if (instance.rho == 0.0) {
    // The tail-average identity needs a positive radius; at zero the ball is
    // the nominal itself, so compare its unsafe mass directly.
    double unsafe = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (instance.unsafe_distance[i] == 0.0) unsafe += instance.weights[i];
    return unsafe <= instance.beta + 1e-12;
  }

  // Density-bounded tail average of Y = -d^p at level beta:
  //   min_a { a + E[(Y - a)_+] / beta },
  // minimized at an atom of Y. Feasible iff rho^p <= -beta * that minimum.
  double cvar = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = -power(instance.unsafe_distance[i], instance.p);
    double tail = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      tail += instance.weights[k] * pos(-power(instance.unsafe_distance[k], instance.p) - a);
    cvar = std::min(cvar, a + tail / instance.beta);
  }
  // Relative slack only: a zero threshold (every atom already unsafe) must
  // stay infeasible for every positive radius.
  const double threshold = -instance.beta * cvar;
  return power(instance.rho, instance.p) <= threshold + 1e-12 * std::abs(threshold);
}

ChanceLinfResult chance_linf(const ChanceInstance& instance) {
  ChanceLinfResult out;
  out.infeasibility_threshold = kInf;
  for (std::size_t i = 0; i < instance.weights.size(); ++i) {
    if (instance.unsafe_distance[i] <= instance.rho) out.value += instance.weights[i];
    out.infeasibility_threshold = std::min(out.infeasibility_threshold, instance.unsafe_distance[i]);
  }
  out.feasible = out.value <= instance.beta + 1e-12;
  return out;
}

std::vector<double> distances_to_halfline(const std::vector<double>& points, double boundary,
                                          bool unsafe_above) {
  std::vector<double> out;
  out.reserve(points.size());
  for (double x : points) out.push_back(unsafe_above ? pos(boundary - x) : pos(x - boundary));
  return out;
}

std::vector<double> distances_to_box(const std::vector<std::vector<double>>& points,
                                     const std::vector<double>& lo, const std::vector<double>& hi,
                                     MetricKind norm) {
  if (norm == MetricKind::explicit_matrix)
    fail(Errc::ShapeMismatch, "box distances need a named norm");
  if (lo.size() != hi.size()) fail(Errc::ShapeMismatch, "box corners differ in dimension");
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (lo[k] > hi[k]) fail(Errc::ShapeMismatch, "box corners are inverted");

  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    if (x.size() != lo.size()) fail(Errc::ShapeMismatch, "point dimension differs from the box");
    double acc = 0.0;
    for (std::size_t k = 0; k < lo.size(); ++k) {
      const double over = std::max(std::max(lo[k] - x[k], x[k] - hi[k]), 0.0);
      switch (norm) {
        case MetricKind::euclidean:
          acc += over * over;
          break;
        case MetricKind::manhattan:
          acc += over;
          break;
        case MetricKind::chebyshev:
          acc = std::max(acc, over);
          break;
        case MetricKind::explicit_matrix:
          break;
      }
    }
    out.push_back(norm == MetricKind::euclidean ? std::sqrt(acc) : acc);
  }
  return out;
}

}  // namespace dro
