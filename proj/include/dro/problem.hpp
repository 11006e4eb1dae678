#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dro {

/// Sentinel for forbidden transports. Infinite-cost pairs are excluded from
/// every inner maximization and every coupling, never approximated by a
/// large finite penalty.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Error codes surfaced by validation and by the analytic risk backends.
enum class Errc {
  ShapeMismatch,
  NegativeWeight,
  WeightsNotNormalized,
  NegativeCost,
  MissingDiagonalZero,
  MissingCoordinates,
  InvalidP,
  OverflowEntropic,
  UnsupportedCombination,
  ParseError,
};

const char* errc_name(Errc code);

/// Exception type for all domain errors; carries a machine-readable code so
/// the CLI can map failures to its exit-code contract.
class DroError : public std::runtime_error {
 public:
  DroError(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Finite candidate set. Every worst-case distribution is supported on these
/// points, so inner suprema are exact column maxima.
struct PointSet {
  std::vector<std::string> labels;
  /// Present when costs are derived from a metric; one vector per label, all
  /// sharing a dimension.
  std::optional<std::vector<std::vector<double>>> coords;

  std::size_t size() const { return labels.size(); }
};

/// Probability vector over point indices. Weights are strictly positive and
/// sum to one; zero-mass atoms are dropped at validation.
struct DiscreteDistribution {
  std::vector<std::size_t> support;
  std::vector<double> weights;

  std::size_t size() const { return support.size(); }
};

/// Pairwise transport costs, rows indexed by nominal atoms and columns by
/// candidate points. Entries live in [0, +inf]; diagonal_map[i] names the
/// column holding the same point as row i, which must cost exactly zero.
struct CostMatrix {
  std::vector<std::vector<double>> entries;
  std::vector<std::size_t> diagonal_map;

  std::size_t rows() const { return entries.size(); }
  std::size_t cols() const { return entries.empty() ? 0 : entries.front().size(); }
};

/// Loss evaluated at each candidate point; all entries finite.
struct LossVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// A discrete worst-case-expectation instance: maximize the expected loss
/// over all distributions within transport budget `radius` of `nominal`.
struct DroProblem {
  PointSet points;
  DiscreteDistribution nominal;
  CostMatrix cost;
  LossVector loss;
  double radius = 0.0;
};

/// Checks every type invariant, drops zero-weight atoms, and renormalizes
/// weights exactly. Throws DroError with one of: ShapeMismatch,
/// NegativeWeight, WeightsNotNormalized, NegativeCost, MissingDiagonalZero.
DroProblem validate_problem(DroProblem problem);

enum class MetricKind { euclidean, chebyshev, manhattan, explicit_matrix };

/// Distance rule: a named norm over point coordinates, or an
/// explicit square distance matrix (which may contain +inf off-diagonal).
struct MetricSpec {
  MetricKind kind = MetricKind::euclidean;
  std::optional<std::vector<std::vector<double>>> matrix;

  static MetricSpec named(MetricKind k) { return MetricSpec{k, std::nullopt}; }
  static MetricSpec explicit_costs(std::vector<std::vector<double>> m) {
    return MetricSpec{MetricKind::explicit_matrix, std::move(m)};
  }
};

/// Builds the square candidate-by-candidate cost matrix d(x_i, x_j)^p.
/// Throws MissingCoordinates for named metrics without coords and InvalidP
/// for p < 1.
CostMatrix cost_from_metric(const PointSet& points, const MetricSpec& metric, double p);

/// Extracts the rows of a square candidate cost matrix that correspond to
/// the nominal support, preserving the zero-diagonal bookkeeping.
CostMatrix rows_for_support(const CostMatrix& square, const std::vector<std::size_t>& support);

}  // namespace dro
