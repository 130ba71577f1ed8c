// Best-first branch-and-bound on the binary variables. Nodes are solved at
// creation so the queue always orders by true LP bounds; ties fall back to
// insertion order. Before branching, a node tries to round its fractional
// binaries onto a feasible side and promotes the result to an incumbent when
// the full constraint check passes, which closes uncontested disjunctions
// without growing the tree.

#include <cmath>
#include <cstdint>
#include <queue>

#include "aim/milp/solver.hpp"

namespace aim::milp {

namespace {

struct Node {
  double bound = 0.0;
  std::uint64_t seq = 0;
  std::vector<detail::BoundOverride> fixings;
  Solution lp;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.seq > b.seq;                              // FIFO on ties
  }
};

bool within(double v, double lo, double hi, double tol) {
  return v >= lo - tol && v <= hi + tol;
}

/// Checks a full value vector against the model (bounds, rows, integrality).
bool is_feasible_point(const MilpModel& model, const std::vector<double>& values,
                       double feas_tol, double int_tol) {
  const auto& vars = model.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (!within(values[j], vars[j].lower, vars[j].upper, feas_tol)) return false;
    if (vars[j].kind == VarKind::Binary &&
        std::abs(values[j] - std::round(values[j])) > int_tol)
      return false;
  }
  for (const auto& c : model.constraints()) {
    double lhs = c.expr.evaluate(values);
    switch (c.sense) {
      case Sense::LessEqual:
        if (lhs > c.rhs + feas_tol) return false;
        break;
      case Sense::GreaterEqual:
        if (lhs < c.rhs - feas_tol) return false;
        break;
      case Sense::Equal:
        if (std::abs(lhs - c.rhs) > feas_tol) return false;
        break;
    }
  }
  return true;
}

/// Fractional binaries are pushed to whichever side keeps the point feasible
/// (greedily, in ascending variable order). Returns false when neither side
/// of some binary works against the partially rounded point.
bool try_round_binaries(const MilpModel& model, std::vector<double>& values,
                        double feas_tol, double int_tol) {
  const auto& vars = model.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].kind != VarKind::Binary) continue;
    double v = values[j];
    if (std::abs(v - std::round(v)) <= int_tol) {
      values[j] = std::round(v);
      continue;
    }
    values[j] = v < 0.5 ? 0.0 : 1.0;
    if (is_feasible_point(model, values, feas_tol, int_tol)) continue;
    values[j] = 1.0 - values[j];
    if (!is_feasible_point(model, values, feas_tol, int_tol)) return false;
  }
  return true;
}

VarId most_fractional_binary(const MilpModel& model, const std::vector<double>& values,
                             double int_tol) {
  VarId best;
  double best_frac = int_tol;
  const auto& vars = model.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].kind != VarKind::Binary) continue;
    double frac = std::abs(values[j] - std::round(values[j]));
    if (frac > best_frac) {  // strict: ties keep the lowest id
      best_frac = frac;
      best = VarId{static_cast<std::uint32_t>(j)};
    }
  }
  return best;
}

}  // namespace

Solution solve_milp(const MilpModel& model, const SolverOptions& options, SolveStats* stats) {
  if (model.num_binaries() == 0) return solve_lp(model, options, stats);

  SolveStats local_stats;
  SolveStats* st = stats ? stats : &local_stats;

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::uint64_t seq = 0;

  Node root;
  root.lp = detail::solve_lp_with_overrides(model, {}, options, st);
  if (root.lp.status != SolveStatus::Optimal) return root.lp;
  root.bound = root.lp.objective;
  root.seq = seq++;
  open.push(std::move(root));

  bool have_incumbent = false;
  Solution incumbent;
  std::uint64_t nodes = 0;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (++nodes > options.max_nodes) {
      Solution sol;
      sol.status = SolveStatus::IterationLimit;
      return sol;
    }
    st->nodes += 1;

    if (have_incumbent && node.bound >= incumbent.objective - 1e-9) continue;

    VarId branch_var = most_fractional_binary(model, node.lp.values, options.integrality_tol);
    if (!branch_var.valid()) {
      // Integral LP optimum: snap binaries exactly and take as incumbent.
      std::vector<double> vals = node.lp.values;
      for (std::size_t j = 0; j < vals.size(); ++j)
        if (model.variables()[j].kind == VarKind::Binary) vals[j] = std::round(vals[j]);
      double obj = model.objective().evaluate(vals);
      if (!have_incumbent || obj < incumbent.objective) {
        incumbent.status = SolveStatus::Optimal;
        incumbent.objective = obj;
        incumbent.values = std::move(vals);
        have_incumbent = true;
      }
      continue;
    }

    // Rounding heuristic: may close this node at its own bound.
    {
      std::vector<double> vals = node.lp.values;
      if (try_round_binaries(model, vals, options.feasibility_tol, options.integrality_tol)) {
        double obj = model.objective().evaluate(vals);
        if (!have_incumbent || obj < incumbent.objective) {
          incumbent.status = SolveStatus::Optimal;
          incumbent.objective = obj;
          incumbent.values = std::move(vals);
          have_incumbent = true;
        }
        if (node.bound >= incumbent.objective - 1e-9) continue;
      }
    }

    for (int side = 0; side < 2; ++side) {
      Node child;
      child.fixings = node.fixings;
      double v = side == 0 ? 0.0 : 1.0;
      child.fixings.push_back({branch_var, v, v});
      child.lp = detail::solve_lp_with_overrides(model, child.fixings, options, st);
      if (child.lp.status == SolveStatus::Infeasible) continue;
      if (child.lp.status != SolveStatus::Optimal) {
        Solution sol;
        sol.status = child.lp.status;  // pivot-cap pathologies bubble up
        return sol;
      }
      child.bound = std::max(child.lp.objective, node.bound);
      if (have_incumbent && child.bound >= incumbent.objective - 1e-9) continue;
      child.seq = seq++;
      open.push(std::move(child));
    }
  }

  if (!have_incumbent) {
    Solution sol;
    sol.status = SolveStatus::Infeasible;
    return sol;
  }
  return incumbent;
}

}  // namespace aim::milp
