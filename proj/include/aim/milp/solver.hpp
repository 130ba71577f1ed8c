#ifndef AIM_MILP_SOLVER_HPP
#define AIM_MILP_SOLVER_HPP

#include <cstdint>
#include <vector>

#include "aim/milp/model.hpp"

namespace aim::milp {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(SolveStatus s);

struct Solution {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> values;  // indexed by VarId

  double value(VarId v) const { return values.at(v.index); }
};

struct SolverOptions {
  double feasibility_tol = 1e-6;
  double integrality_tol = 1e-6;
  /// Simplex pivot cap per LP solve; hitting it signals numerical pathology.
  std::uint32_t max_pivots = 10000;
  /// Branch-and-bound node cap.
  std::uint64_t max_nodes = 1u << 22;
};

struct SolveStats {
  std::uint64_t lp_solves = 0;
  std::uint64_t pivots = 0;
  std::uint64_t nodes = 0;
};

/// Solves the LP relaxation (binaries relaxed to [0, 1]). Bounded-variable
/// primal simplex with Bland's rule; deterministic for identical input.
Solution solve_lp(const MilpModel& model, const SolverOptions& options = {},
                  SolveStats* stats = nullptr);

/// Exact branch-and-bound over the binary variables. Branching variable is
/// the most fractional binary (ties to lowest id); node selection is best
/// lower bound (ties FIFO).
Solution solve_milp(const MilpModel& model, const SolverOptions& options = {},
                    SolveStats* stats = nullptr);

namespace detail {
/// Per-variable bound overrides used by branch-and-bound node fixings.
struct BoundOverride {
  VarId var;
  double lower;
  double upper;
};
Solution solve_lp_with_overrides(const MilpModel& model,
                                 const std::vector<BoundOverride>& overrides,
                                 const SolverOptions& options, SolveStats* stats);
}  // namespace detail

}  // namespace aim::milp

#endif  // AIM_MILP_SOLVER_HPP
