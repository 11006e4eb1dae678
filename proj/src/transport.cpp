#include "dro/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

namespace dro {

namespace {

constexpr double kFeasTol = 1e-9;

[[noreturn]] void fail(Errc code, const std::string& what) { throw DroError(code, what); }

// Bipartite max-flow (shortest augmenting paths). Node layout: 0 source,
// 1..n rows, n+1..n+m columns, n+m+1 sink. Returns the flow value and fills
// `flow` with the row-to-column shipments.
double bipartite_max_flow(const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<std::vector<char>>& admissible,
                          std::vector<std::vector<double>>& flow) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t nodes = n + m + 2;
  const std::size_t src = 0, snk = n + m + 1;

  struct Edge {
    std::size_t to;
    double cap;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> g(nodes);
  auto add_edge = [&](std::size_t u, std::size_t v, double cap) {
    g[u].push_back({v, cap, g[v].size()});
    g[v].push_back({u, 0.0, g[u].size() - 1});
  };
  for (std::size_t i = 0; i < n; ++i) add_edge(src, 1 + i, a[i]);
  for (std::size_t j = 0; j < m; ++j) add_edge(1 + n + j, snk, b[j]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (admissible[i][j]) add_edge(1 + i, 1 + n + j, 2.0); // any cap >= total mass
    }
  }

  double total = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> parent(nodes); // (node, edge index)
  while (true) {
    std::fill(parent.begin(), parent.end(), std::make_pair(nodes, std::size_t{0}));
    parent[src] = {src, 0};
    std::queue<std::size_t> bfs;
    bfs.push(src);
    while (!bfs.empty() && parent[snk].first == nodes) {
      const std::size_t u = bfs.front();
      bfs.pop();
      for (std::size_t e = 0; e < g[u].size(); ++e) {
        const Edge& ed = g[u][e];
        if (ed.cap > 0.0 && parent[ed.to].first == nodes) {
          parent[ed.to] = {u, e};
          bfs.push(ed.to);
        }
      }
    }
    if (parent[snk].first == nodes) break;
    double push = kInf;
    for (std::size_t v = snk; v != src;) {
      auto [u, e] = parent[v];
      push = std::min(push, g[u][e].cap);
      v = u;
    }
    for (std::size_t v = snk; v != src;) {
      auto [u, e] = parent[v];
      g[u][e].cap -= push;
      g[g[u][e].to][g[u][e].rev].cap += push;
      v = u;
    }
    total += push;
  }

  flow.assign(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (const Edge& ed : g[1 + i]) {
      if (ed.to >= 1 + n && ed.to < 1 + n + m) {
        const double shipped = g[ed.to][ed.rev].cap; // reverse cap = flow pushed
        if (shipped > 0.0) flow[i][ed.to - 1 - n] = shipped;
      }
    }
  }
  return total;
}

// Minimum-cost transportation over the admissible (finite-cost) arcs,
// starting from a feasible flow. Dense simplex on the arc forest; entering
// arc is the most negative reduced cost (Bland's rule after a burn-in to
// guarantee termination under degeneracy).
double transportation_simplex(const std::vector<std::vector<double>>& cost,
                              const std::vector<std::vector<char>>& admissible,
                              std::vector<std::vector<double>>& x) {
  const std::size_t n = x.size();
  const std::size_t m = x.front().size();

  std::vector<std::vector<char>> basis(n, std::vector<char>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (x[i][j] > 1e-15) basis[i][j] = 1;

  // Nodes: rows 0..n-1, columns n..n+m-1.
  auto neighbors = [&](std::size_t node, auto&& visit) {
    if (node < n) {
      for (std::size_t j = 0; j < m; ++j)
        if (basis[node][j]) visit(n + j, node, j);
    } else {
      const std::size_t j = node - n;
      for (std::size_t i = 0; i < n; ++i)
        if (basis[i][j]) visit(i, i, j);
    }
  };

  // Removes cycles from the initial support so the basis is a forest. Each
  // pass cancels mass around one cycle without increasing cost and zeroes at
  // least one arc. Parents are assigned once per pass, so the two root paths
  // of a detected closing edge are stable; the bipartite graph has at most
  // one arc per (row, column) pair.
  while (true) {
    std::vector<std::size_t> parent(n + m, n + m);
    std::vector<char> visited(n + m, 0);
    std::size_t cu = n + m, cv = n + m; // endpoints of a closing (non-tree) edge
    for (std::size_t root = 0; root < n + m && cu == n + m; ++root) {
      if (visited[root]) continue;
      visited[root] = 1;
      parent[root] = root;
      std::vector<std::size_t> stack{root};
      while (!stack.empty() && cu == n + m) {
        const std::size_t u = stack.back();
        stack.pop_back();
        neighbors(u, [&](std::size_t v, std::size_t, std::size_t) {
          if (cu != n + m || v == parent[u] || parent[v] == u) return;
          if (!visited[v]) {
            visited[v] = 1;
            parent[v] = u;
            stack.push_back(v);
          } else {
            cu = u;
            cv = v;
          }
        });
      }
    }
    if (cu == n + m) break;

    // Cycle = path(cu -> lca) + reversed path(cv -> lca) + closing arc.
    std::vector<std::size_t> up_a, up_b;
    for (std::size_t w = cu;; w = parent[w]) {
      up_a.push_back(w);
      if (parent[w] == w) break;
    }
    for (std::size_t w = cv;; w = parent[w]) {
      up_b.push_back(w);
      if (parent[w] == w) break;
    }
    std::vector<char> in_a(n + m, 0);
    for (std::size_t w : up_a) in_a[w] = 1;
    std::size_t lca = up_b.back();
    for (std::size_t w : up_b) {
      if (in_a[w]) {
        lca = w;
        break;
      }
    }
    std::vector<std::size_t> path; // cu ... lca ... cv as a node sequence
    for (std::size_t w : up_a) {
      path.push_back(w);
      if (w == lca) break;
    }
    std::vector<std::size_t> tail;
    for (std::size_t w : up_b) {
      if (w == lca) break;
      tail.push_back(w);
    }
    std::reverse(tail.begin(), tail.end());
    path.insert(path.end(), tail.begin(), tail.end());

    // Arcs along the node path alternate row->col / col->row; the closing
    // arc joins path.back() and path.front().
    std::vector<std::pair<std::size_t, std::size_t>> plus, minus;
    auto arc_of = [&](std::size_t u, std::size_t v) {
      return u < n ? std::make_pair(u, v - n) : std::make_pair(v, u - n);
    };
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      auto [i, j] = arc_of(path[k], path[k + 1]);
      ((path[k] < n) ? plus : minus).push_back({i, j});
    }
    {
      auto [i, j] = arc_of(path.back(), path.front());
      ((path.back() < n) ? plus : minus).push_back({i, j});
    }
    double delta_cost = 0.0;
    for (auto [i, j] : plus) delta_cost += cost[i][j];
    for (auto [i, j] : minus) delta_cost -= cost[i][j];
    if (delta_cost > 0.0) std::swap(plus, minus); // shift in the cheaper direction
    double step = kInf;
    for (auto [i, j] : minus) step = std::min(step, x[i][j]);
    for (auto [i, j] : plus) x[i][j] += step;
    for (auto [i, j] : minus) {
      x[i][j] -= step;
      if (x[i][j] <= 1e-15) {
        x[i][j] = 0.0;
        basis[i][j] = 0;
      }
    }
  }

  // Simplex iterations on the forest basis.
  const int bland_after = 2000, hard_cap = 100000;
  for (int iter = 0; iter < hard_cap; ++iter) {
    // Potentials per connected component of the basis forest.
    std::vector<double> u(n, 0.0), v(m, 0.0);
    std::vector<char> seen(n + m, 0);
    for (std::size_t root = 0; root < n + m; ++root) {
      if (seen[root]) continue;
      seen[root] = 1;
      std::vector<std::size_t> stack{root};
      while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        neighbors(node, [&](std::size_t next, std::size_t ri, std::size_t cj) {
          if (seen[next]) return;
          seen[next] = 1;
          if (next < n)
            u[next] = cost[ri][cj] - v[cj];
          else
            v[cj] = cost[ri][cj] - u[ri];
          stack.push_back(next);
        });
      }
    }

    std::size_t ei = n, ej = m;
    double best = -1e-11;
    bool bland = iter >= bland_after;
    for (std::size_t i = 0; i < n && (!bland || ei == n); ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (!admissible[i][j] || basis[i][j]) continue;
        const double r = cost[i][j] - u[i] - v[j];
        if (r < best) {
          best = r;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    }
    if (ei == n) break; // optimal

    // Path from row ei to column ej inside the basis forest, if any.
    std::vector<std::size_t> parent(n + m, n + m);
    {
      std::vector<std::size_t> stack{ei};
      parent[ei] = ei;
      while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        if (node == n + ej) break;
        neighbors(node, [&](std::size_t next, std::size_t, std::size_t) {
          if (parent[next] == n + m) {
            parent[next] = node;
            stack.push_back(next);
          }
        });
      }
    }
    if (parent[n + ej] == n + m) {
      // Different components: the arc enters with zero flow and merges them.
      basis[ei][ej] = 1;
      continue;
    }
    std::vector<std::size_t> path; // n+ej back to ei
    for (std::size_t w = n + ej; w != ei; w = parent[w]) path.push_back(w);
    path.push_back(ei);
    std::reverse(path.begin(), path.end()); // ei ... n+ej
    // Cycle: entering arc (ei, ej) carries +step, path arcs alternate.
    std::vector<std::pair<std::size_t, std::size_t>> plus{{ei, ej}}, minus;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const std::size_t a = path[k], b = path[k + 1];
      const auto arc = a < n ? std::make_pair(a, b - n) : std::make_pair(b, a - n);
      ((a < n) ? plus : minus).push_back(arc);
    }
    // plus currently holds the entering arc plus the row->col path arcs, but
    // orientation around the cycle alternates: path arcs traversed row->col
    // DECREASE when the entering arc increases. Swap accordingly.
    plus.erase(plus.begin());
    std::swap(plus, minus);
    plus.insert(plus.begin(), {ei, ej});

    double step = kInf;
    std::size_t li = n, lj = m;
    for (auto [i, j] : minus) {
      if (x[i][j] < step) {
        step = x[i][j];
        li = i;
        lj = j;
      }
    }
    for (auto [i, j] : plus) x[i][j] += step;
    for (auto [i, j] : minus) x[i][j] -= step;
    x[li][lj] = 0.0;
    basis[li][lj] = 0;
    basis[ei][ej] = 1;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (x[i][j] > 0.0) total += x[i][j] * cost[i][j];
  return total;
}

struct DenseMarginals {
  std::vector<double> a, b;
  std::vector<std::vector<double>> cost; // |mu| x |nu| slice
};

DenseMarginals slice_instance(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                              const CostMatrix& cost) {
  if (mu.support.size() != mu.weights.size() || nu.support.size() != nu.weights.size())
    fail(Errc::ShapeMismatch, "distribution support and weights differ in length");
  if (mu.support.empty() || nu.support.empty())
    fail(Errc::ShapeMismatch, "distributions must be nonempty");
  DenseMarginals out;
  out.a = mu.weights;
  out.b = nu.weights;
  out.cost.assign(mu.size(), std::vector<double>(nu.size(), 0.0));
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.support[i] >= cost.rows()) fail(Errc::ShapeMismatch, "mu support outside cost rows");
    for (std::size_t j = 0; j < nu.size(); ++j) {
      if (nu.support[j] >= cost.cols()) fail(Errc::ShapeMismatch, "nu support outside cost columns");
      out.cost[i][j] = cost.entries[mu.support[i]][nu.support[j]];
    }
  }
  return out;
}

}  // namespace

KantorovichResult kantorovich_cost(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                                   const CostMatrix& cost) {
  DenseMarginals inst = slice_instance(mu, nu, cost);
  const std::size_t n = inst.a.size(), m = inst.b.size();

  std::vector<std::vector<char>> admissible(n, std::vector<char>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) admissible[i][j] = std::isfinite(inst.cost[i][j]);

  std::vector<std::vector<double>> flow;
  const double pushed = bipartite_max_flow(inst.a, inst.b, admissible, flow);
  const double mass = std::accumulate(inst.a.begin(), inst.a.end(), 0.0);
  if (pushed < mass - kFeasTol) return {kInf, std::nullopt};

  const double value = transportation_simplex(inst.cost, admissible, flow);
  Coupling plan;
  plan.mass = std::move(flow);
  plan.row_marginal = inst.a;
  plan.col_marginal = inst.b;
  return {value, std::move(plan)};
}

double max_transport_cost(const DiscreteDistribution& mu, const DiscreteDistribution& nu,
                          const CostMatrix& cost) {
  DenseMarginals inst = slice_instance(mu, nu, cost);
  const std::size_t n = inst.a.size(), m = inst.b.size();

  std::vector<double> thresholds;
  for (const auto& row : inst.cost)
    for (double c : row)
      if (std::isfinite(c)) thresholds.push_back(c);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  if (thresholds.empty()) return kInf;

  const double mass = std::accumulate(inst.a.begin(), inst.a.end(), 0.0);
  auto feasible_at = [&](double t) {
    std::vector<std::vector<char>> admissible(n, std::vector<char>(m, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) admissible[i][j] = inst.cost[i][j] <= t;
    std::vector<std::vector<double>> flow;
    return bipartite_max_flow(inst.a, inst.b, admissible, flow) >= mass - kFeasTol;
  };

  if (!feasible_at(thresholds.back())) return kInf;
  std::size_t lo = 0, hi = thresholds.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (feasible_at(thresholds[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return thresholds[lo];
}

namespace {

PrimalResult finish_result(const DroProblem& problem, std::vector<std::vector<double>> mass) {
  const std::size_t n = mass.size(), m = problem.loss.size();
  PrimalResult out;
  out.coupling.mass = std::move(mass);
  out.coupling.row_marginal = problem.nominal.weights;
  out.coupling.col_marginal.assign(m, 0.0);
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double g = out.coupling.mass[i][j];
      if (g == 0.0) continue;
      out.coupling.col_marginal[j] += g;
      value += g * problem.loss.values[j];
    }
  }
  out.value = value;
  for (std::size_t j = 0; j < m; ++j) {
    if (out.coupling.col_marginal[j] > 0.0) {
      out.worst_case.support.push_back(j);
      out.worst_case.weights.push_back(out.coupling.col_marginal[j]);
    }
  }
  return out;
}

// Per-row scan at a fixed penalty: the best line value, the cheapest and
// priciest columns attaining it (within float noise), lowest index first.
struct RowScan {
  double value;
  std::size_t lo_col, hi_col;
};

RowScan scan_row(const DroProblem& problem, std::size_t i, double lambda) {
  const auto& f = problem.loss.values;
  const auto& c = problem.cost.entries[i];
  const std::size_t m = f.size();
  double vmax = -kInf, cmax = 0.0, fmax = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!std::isfinite(c[j])) continue;
    vmax = std::max(vmax, f[j] - lambda * c[j]);
    cmax = std::max(cmax, c[j]);
    fmax = std::max(fmax, std::abs(f[j]));
  }
  const double tol = 1e-14 * (1.0 + fmax + lambda * cmax);
  RowScan out{vmax, m, m};
  double lo_cost = kInf, hi_cost = -1.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!std::isfinite(c[j])) continue;
    if (f[j] - lambda * c[j] < vmax - tol) continue;
    if (c[j] < lo_cost) {
      lo_cost = c[j];
      out.lo_col = j;
    }
    if (c[j] > hi_cost) {
      hi_cost = c[j];
      out.hi_col = j;
    }
  }
  return out;
}

double cheapest_active_cost(const DroProblem& problem, double lambda) {
  double total = 0.0;
  for (std::size_t i = 0; i < problem.nominal.size(); ++i) {
    const RowScan s = scan_row(problem, i, lambda);
    total += problem.nominal.weights[i] * problem.cost.entries[i][s.lo_col];
  }
  return total;
}

}  // namespace

PrimalResult primal_worst_case(const DroProblem& problem) {
  const std::size_t n = problem.nominal.size();
  const std::size_t m = problem.loss.size();
  const auto& w = problem.nominal.weights;
  const auto& f = problem.loss.values;
  const double rho = problem.radius;

  std::vector<std::vector<double>> mass(n, std::vector<double>(m, 0.0));

  if (rho == 0.0) {
    // Zero budget: only zero-cost arcs may carry mass.
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = problem.cost.diagonal_map[i];
      for (std::size_t j = 0; j < m; ++j) {
        if (problem.cost.entries[i][j] == 0.0 && f[j] > f[best]) best = j;
      }
      mass[i][best] = w[i];
    }
    return finish_result(problem, std::move(mass));
  }

  // Candidate penalties: within-row crossings of the column lines. The
  // cheapest-active cost is a nonincreasing right-continuous step function
  // of the penalty that only changes at these values.
  std::vector<double> candidates{0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = problem.cost.entries[i];
    for (std::size_t j = 0; j < m; ++j) {
      if (!std::isfinite(c[j])) continue;
      for (std::size_t k = j + 1; k < m; ++k) {
        if (!std::isfinite(c[k])) continue;
        if (c[j] == c[k]) continue;
        const double lam = (f[j] - f[k]) / (c[j] - c[k]);
        if (lam > 0.0 && std::isfinite(lam)) candidates.push_back(lam);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Smallest candidate where the cheapest-active cost fits in the budget.
  double lambda_star = 0.0;
  if (cheapest_active_cost(problem, 0.0) > rho) {
    std::size_t lo = 1, hi = candidates.size() - 1;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (cheapest_active_cost(problem, candidates[mid]) <= rho)
        hi = mid;
      else
        lo = mid + 1;
    }
    lambda_star = candidates[lo];
  }

  // Vertex construction: start every row at its cheapest active column and
  // spend the remaining budget by moving rows to their priciest active
  // column; at most one row is split fractionally so the budget binds.
  std::vector<RowScan> scans(n);
  double spent = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scans[i] = scan_row(problem, i, lambda_star);
    mass[i][scans[i].lo_col] = w[i];
    spent += w[i] * problem.cost.entries[i][scans[i].lo_col];
  }
  if (lambda_star > 0.0) {
    for (std::size_t i = 0; i < n && spent < rho; ++i) {
      const std::size_t lo = scans[i].lo_col, hi = scans[i].hi_col;
      if (hi == lo) continue;
      const double delta = w[i] * (problem.cost.entries[i][hi] - problem.cost.entries[i][lo]);
      if (delta <= 0.0) continue;
      if (spent + delta <= rho) {
        mass[i][lo] = 0.0;
        mass[i][hi] = w[i];
        spent += delta;
      } else {
        const double t = (rho - spent) / delta;
        mass[i][lo] = w[i] * (1.0 - t);
        mass[i][hi] = w[i] * t;
        spent = rho;
      }
    }
  }
  return finish_result(problem, std::move(mass));
}

PrimalResult primal_soft(const DroProblem& problem, double lambda) {
  if (lambda < 0.0 || std::isnan(lambda)) fail(Errc::ShapeMismatch, "penalty must be nonnegative");
  const std::size_t n = problem.nominal.size();
  const std::size_t m = problem.loss.size();
  std::vector<std::vector<double>> mass(n, std::vector<double>(m, 0.0));
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = problem.cost.entries[i];
    std::size_t best = m;
    double vmax = -kInf;
    for (std::size_t j = 0; j < m; ++j) {
      if (!std::isfinite(c[j])) continue;
      const double v = problem.loss.values[j] - lambda * c[j];
      if (v > vmax) { // strict: ties keep the lowest column index
        vmax = v;
        best = j;
      }
    }
    mass[i][best] = problem.nominal.weights[i];
    value += problem.nominal.weights[i] * vmax;
  }
  PrimalResult out = finish_result(problem, std::move(mass));
  out.value = value; // penalized objective, not the raw expected loss
  return out;
}

}  // namespace dro
