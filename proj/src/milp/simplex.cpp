// Bounded-variable primal simplex over a dense tableau. Structural columns
// fixed by their bounds (frozen values, branch-and-bound fixings) are folded
// into the row constants and never enter the tableau. Two phases: phase 1
// minimizes the sum of artificial columns added for rows whose slack starts
// outside its bounds, phase 2 minimizes the model objective.
//
// The entering rule is Dantzig's (most improving reduced cost) while the
// objective makes progress; a run of degenerate steps switches to Bland's
// rule, whose finite-termination guarantee breaks ties and cycles, and any
// strict progress switches back. The leaving rule is min-ratio with the
// smallest basic variable index on ties. Deterministic for identical input.

#include <algorithm>
#include <cmath>
#include <cstring>

#include "aim/milp/solver.hpp"

namespace aim::milp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr int kDegenerateSwitch = 40;  // degenerate steps before Bland mode

enum class ColState : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

class Simplex {
 public:
  Simplex(const MilpModel& model, const std::vector<detail::BoundOverride>& overrides,
          const SolverOptions& options)
      : model_(model), options_(options) {
    std::size_t nv = model.num_variables();
    m_ = model.num_constraints();
    var_lower_.resize(nv);
    var_upper_.resize(nv);
    for (std::size_t j = 0; j < nv; ++j) {
      var_lower_[j] = model.variables()[j].lower;
      var_upper_[j] = model.variables()[j].upper;
    }
    for (const auto& o : overrides) {
      var_lower_[o.var.index] = std::max(var_lower_[o.var.index], o.lower);
      var_upper_[o.var.index] = std::min(var_upper_[o.var.index], o.upper);
    }
  }

  Solution run(SolveStats* stats) {
    Solution sol;
    for (std::size_t j = 0; j < var_lower_.size(); ++j) {
      if (var_lower_[j] > var_upper_[j]) {
        sol.status = SolveStatus::Infeasible;
        return sol;
      }
    }
    build_tableau();

    if (have_artificials_) {
      SolveStatus st = iterate();
      if (stats) stats->pivots += pivots_;
      if (st != SolveStatus::Optimal) {
        // Phase 1 cannot be unbounded; anything but optimal is a pivot cap.
        sol.status = SolveStatus::IterationLimit;
        return sol;
      }
      double infeas = 0.0;
      for (std::size_t j = art_begin_; j < n_; ++j) infeas += col_value(j);
      if (infeas > options_.feasibility_tol) {
        sol.status = SolveStatus::Infeasible;
        return sol;
      }
      // Pin artificials at zero for phase 2.
      for (std::size_t j = art_begin_; j < n_; ++j) {
        lower_[j] = 0.0;
        upper_[j] = 0.0;
        if (state_[j] != ColState::Basic) {
          state_[j] = ColState::AtLower;
          xval_[j] = 0.0;
        }
      }
    }

    load_phase2_costs();
    SolveStatus st = iterate();
    if (stats) {
      stats->pivots += pivots_;
      stats->lp_solves += 1;
    }
    if (st != SolveStatus::Optimal) {
      sol.status = st;
      return sol;
    }

    sol.status = SolveStatus::Optimal;
    sol.values.resize(var_lower_.size());
    for (std::size_t j = 0; j < var_lower_.size(); ++j) {
      int col = col_of_var_[j];
      sol.values[j] = col < 0 ? var_lower_[j] : col_value(static_cast<std::size_t>(col));
    }
    sol.objective = model_.objective().evaluate(sol.values);
    return sol;
  }

 private:
  double col_value(std::size_t j) const {
    return state_[j] == ColState::Basic ? rhs_x_[basis_row_[j]] : xval_[j];
  }

  bool is_fixed_var(std::size_t j) const {
    return var_lower_[j] == var_upper_[j] && std::isfinite(var_lower_[j]);
  }

  void build_tableau() {
    std::size_t nv = var_lower_.size();
    // Active structural columns: anything not pinned by its bounds.
    col_of_var_.assign(nv, -1);
    active_vars_.clear();
    for (std::size_t j = 0; j < nv; ++j) {
      if (is_fixed_var(j)) continue;
      col_of_var_[j] = static_cast<int>(active_vars_.size());
      active_vars_.push_back(j);
    }
    ns_ = active_vars_.size();

    lower_.assign(ns_ + m_, 0.0);
    upper_.assign(ns_ + m_, 0.0);
    for (std::size_t c = 0; c < ns_; ++c) {
      lower_[c] = var_lower_[active_vars_[c]];
      upper_[c] = var_upper_[active_vars_[c]];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const Constraint& c = model_.constraints()[i];
      switch (c.sense) {
        case Sense::LessEqual:
          lower_[ns_ + i] = 0.0;
          upper_[ns_ + i] = kInfinity;
          break;
        case Sense::GreaterEqual:
          lower_[ns_ + i] = -kInfinity;
          upper_[ns_ + i] = 0.0;
          break;
        case Sense::Equal:
          lower_[ns_ + i] = 0.0;
          upper_[ns_ + i] = 0.0;
          break;
      }
    }

    n_ = ns_ + m_;
    state_.assign(n_, ColState::AtLower);
    xval_.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[j])) {
        state_[j] = ColState::AtLower;
        xval_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        state_[j] = ColState::AtUpper;
        xval_[j] = upper_[j];
      } else {
        state_[j] = ColState::FreeZero;
        xval_[j] = 0.0;
      }
    }

    // Row constants with fixed columns folded in, and activities at the
    // nonbasic start values.
    std::vector<double> brow(m_, 0.0);
    std::vector<double> act(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const Constraint& c = model_.constraints()[i];
      double b = c.rhs - c.expr.constant();
      double a = 0.0;
      for (const auto& [v, coeff] : c.expr.terms()) {
        int col = col_of_var_[v.index];
        if (col < 0)
          b -= coeff * var_lower_[v.index];
        else
          a += coeff * xval_[col];
      }
      brow[i] = b;
      act[i] = a;
    }

    basis_.assign(m_, 0);
    std::vector<double> art_sign(m_, 0.0);
    std::size_t n_art = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      double s = brow[i] - act[i];
      std::size_t sj = ns_ + i;
      if (s >= lower_[sj] - options_.feasibility_tol &&
          s <= upper_[sj] + options_.feasibility_tol) {
        basis_[i] = static_cast<int>(sj);
        state_[sj] = ColState::Basic;
      } else {
        double sv = s < lower_[sj] ? lower_[sj] : upper_[sj];
        xval_[sj] = sv;
        state_[sj] = sv == lower_[sj] ? ColState::AtLower : ColState::AtUpper;
        art_sign[i] = (s - sv) > 0.0 ? 1.0 : -1.0;
        ++n_art;
      }
    }

    have_artificials_ = n_art > 0;
    art_begin_ = n_;
    n_ += n_art;
    lower_.resize(n_, 0.0);
    upper_.resize(n_, kInfinity);
    state_.resize(n_, ColState::AtLower);
    xval_.resize(n_, 0.0);

    tab_.assign(m_ * n_, 0.0);
    rhs_x_.assign(m_, 0.0);
    basis_row_.assign(n_, -1);
    std::size_t art = art_begin_;
    for (std::size_t i = 0; i < m_; ++i) {
      double scale = art_sign[i] != 0.0 ? art_sign[i] : 1.0;
      double* row = &tab_[i * n_];
      const Constraint& c = model_.constraints()[i];
      for (const auto& [v, coeff] : c.expr.terms()) {
        int col = col_of_var_[v.index];
        if (col >= 0) row[col] = coeff * scale;
      }
      row[ns_ + i] = scale;
      if (art_sign[i] != 0.0) {
        row[art] = 1.0;
        basis_[i] = static_cast<int>(art);
        state_[art] = ColState::Basic;
        rhs_x_[i] = std::abs(brow[i] - act[i] - xval_[ns_ + i]);
        basis_row_[art] = static_cast<int>(i);
        ++art;
      } else {
        rhs_x_[i] = brow[i] - act[i];
        basis_row_[basis_[i]] = static_cast<int>(i);
      }
    }

    dj_.assign(n_, 0.0);
    if (have_artificials_) {
      for (std::size_t j = art_begin_; j < n_; ++j) dj_[j] = 1.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (static_cast<std::size_t>(basis_[i]) >= art_begin_) {
          const double* row = &tab_[i * n_];
          for (std::size_t j = 0; j < n_; ++j) dj_[j] -= row[j];
        }
      }
    }
    pivots_ = 0;
    bland_ = false;
    degenerate_streak_ = 0;
  }

  void load_phase2_costs() {
    cost_.assign(n_, 0.0);
    for (const auto& [v, c] : model_.objective().terms()) {
      int col = col_of_var_[v.index];
      if (col >= 0) cost_[col] = c;
    }
    dj_ = cost_;
    for (std::size_t i = 0; i < m_; ++i) {
      double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &tab_[i * n_];
      for (std::size_t j = 0; j < n_; ++j) dj_[j] -= cb * row[j];
    }
    bland_ = false;
    degenerate_streak_ = 0;
  }

  bool fixed_col(std::size_t j) const {
    return lower_[j] == upper_[j] && std::isfinite(lower_[j]);
  }

  // Entering column and direction, or n_ when dual-feasible (optimal).
  std::pair<std::size_t, int> pick_entering() const {
    if (!bland_) {
      std::size_t best = n_;
      int dir = 0;
      double score = kDualTol;
      for (std::size_t j = 0; j < n_; ++j) {
        if (state_[j] == ColState::Basic || fixed_col(j)) continue;
        double d = dj_[j];
        if ((state_[j] == ColState::AtLower || state_[j] == ColState::FreeZero) &&
            -d > score) {
          score = -d;
          best = j;
          dir = +1;
        }
        if ((state_[j] == ColState::AtUpper || state_[j] == ColState::FreeZero) && d > score) {
          score = d;
          best = j;
          dir = -1;
        }
      }
      return {best, dir};
    }
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == ColState::Basic || fixed_col(j)) continue;
      if ((state_[j] == ColState::AtLower || state_[j] == ColState::FreeZero) &&
          dj_[j] < -kDualTol)
        return {j, +1};
      if ((state_[j] == ColState::AtUpper || state_[j] == ColState::FreeZero) &&
          dj_[j] > kDualTol)
        return {j, -1};
    }
    return {n_, 0};
  }

  SolveStatus iterate() {
    while (true) {
      if (pivots_ >= options_.max_pivots) return SolveStatus::IterationLimit;

      auto [enter, dir] = pick_entering();
      if (enter == n_) {
        if (!bland_) return SolveStatus::Optimal;
        // Bland mode found no candidate either: truly optimal.
        return SolveStatus::Optimal;
      }

      double range = upper_[enter] - lower_[enter];
      double best = std::isfinite(range) ? range : kInfinity;
      int leave = -1;
      bool leave_at_upper = false;
      const std::size_t stride = n_;
      for (std::size_t i = 0; i < m_; ++i) {
        double alpha = dir * tab_[i * stride + enter];
        int k = basis_[i];
        if (alpha > kPivotTol) {
          if (!std::isfinite(lower_[k])) continue;
          double step = (rhs_x_[i] - lower_[k]) / alpha;
          if (step < 0.0) step = 0.0;
          if (step < best - 1e-12 ||
              (step < best + 1e-12 && leave >= 0 && k < basis_[leave])) {
            best = step;
            leave = static_cast<int>(i);
            leave_at_upper = false;
          }
        } else if (alpha < -kPivotTol) {
          if (!std::isfinite(upper_[k])) continue;
          double step = (upper_[k] - rhs_x_[i]) / (-alpha);
          if (step < 0.0) step = 0.0;
          if (step < best - 1e-12 ||
              (step < best + 1e-12 && leave >= 0 && k < basis_[leave])) {
            best = step;
            leave = static_cast<int>(i);
            leave_at_upper = true;
          }
        }
      }

      if (leave < 0 && !std::isfinite(best)) return SolveStatus::Unbounded;

      double progress = std::abs(dj_[enter]) * best;
      if (progress > 1e-12) {
        degenerate_streak_ = 0;
        bland_ = false;
      } else if (++degenerate_streak_ >= kDegenerateSwitch) {
        bland_ = true;
      }

      if (leave < 0) {
        // Bound flip.
        for (std::size_t i = 0; i < m_; ++i)
          rhs_x_[i] -= dir * best * tab_[i * stride + enter];
        xval_[enter] = dir > 0 ? upper_[enter] : lower_[enter];
        state_[enter] = dir > 0 ? ColState::AtUpper : ColState::AtLower;
        ++pivots_;
        continue;
      }

      double enter_new = col_value(enter) + dir * best;
      for (std::size_t i = 0; i < m_; ++i) {
        if (static_cast<int>(i) == leave) continue;
        rhs_x_[i] -= dir * best * tab_[i * stride + enter];
      }
      int out = basis_[leave];
      xval_[out] = leave_at_upper ? upper_[out] : lower_[out];
      state_[out] = leave_at_upper ? ColState::AtUpper : ColState::AtLower;
      basis_row_[out] = -1;

      double* prow = &tab_[static_cast<std::size_t>(leave) * stride];
      double inv = 1.0 / prow[enter];
      for (std::size_t j = 0; j < n_; ++j) prow[j] *= inv;
      prow[enter] = 1.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (static_cast<int>(i) == leave) continue;
        double f = tab_[i * stride + enter];
        if (f == 0.0) continue;
        double* row = &tab_[i * stride];
        for (std::size_t j = 0; j < n_; ++j) row[j] -= f * prow[j];
        row[enter] = 0.0;
      }
      double fd = dj_[enter];
      if (fd != 0.0) {
        for (std::size_t j = 0; j < n_; ++j) dj_[j] -= fd * prow[j];
        dj_[enter] = 0.0;
      }

      basis_[leave] = static_cast<int>(enter);
      basis_row_[enter] = leave;
      state_[enter] = ColState::Basic;
      rhs_x_[leave] = enter_new;
      ++pivots_;
    }
  }

  const MilpModel& model_;
  const SolverOptions& options_;
  std::vector<double> var_lower_, var_upper_;  // post-override, all variables
  std::vector<int> col_of_var_;                // -1 when folded
  std::vector<std::size_t> active_vars_;
  std::size_t ns_ = 0, m_ = 0, n_ = 0, art_begin_ = 0;
  bool have_artificials_ = false;
  std::vector<double> lower_, upper_, cost_, dj_, tab_, rhs_x_, xval_;
  std::vector<int> basis_, basis_row_;
  std::vector<ColState> state_;
  std::uint32_t pivots_ = 0;
  bool bland_ = false;
  int degenerate_streak_ = 0;
};

}  // namespace

namespace detail {
Solution solve_lp_with_overrides(const MilpModel& model,
                                 const std::vector<BoundOverride>& overrides,
                                 const SolverOptions& options, SolveStats* stats) {
  if (model.num_variables() == 0)
    throw std::invalid_argument("solve_lp: model has no variables");
  Simplex s(model, overrides, options);
  return s.run(stats);
}
}  // namespace detail

Solution solve_lp(const MilpModel& model, const SolverOptions& options, SolveStats* stats) {
  return detail::solve_lp_with_overrides(model, {}, options, stats);
}

}  // namespace aim::milp
