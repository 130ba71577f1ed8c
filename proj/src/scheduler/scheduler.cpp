#include "aim/scheduler/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace aim::sched {

using milp::LinExpr;
using milp::Sense;
using milp::VarId;

double default_access_distance(double v_avg, double a_max) {
  return v_avg * v_avg / (2.0 * a_max) + 2.0 * v_avg;
}

double compute_t_access_min(const Vehicle& vehicle, const SchedulerParams& params, double now) {
  double d = vehicle.distance_to_access;
  if (d <= 0.0) return now;
  double v = std::min(vehicle.velocity, params.v_max);
  double ramp = (params.v_max * params.v_max - v * v) / (2.0 * params.a_max);
  double t;
  if (d <= ramp) {
    t = (-v + std::sqrt(v * v + 2.0 * params.a_max * d)) / params.a_max;
  } else {
    t = (params.v_max - v) / params.a_max + (d - ramp) / params.v_max;
  }
  return now + t;
}

double compute_t_desired(const Vehicle& vehicle, const SchedulerParams& params, double now) {
  if (vehicle.desired_override) return *vehicle.desired_override;
  return now + vehicle.distance_to_access / params.v_avg;
}

double compute_t_gap1(double follower_velocity, const SchedulerParams& params,
                      double vehicle_length) {
  if (follower_velocity < params.v_still)
    return std::max(params.headway_floor, vehicle_length / params.v_still);
  if (follower_velocity < params.v_slow)
    return params.headway_floor + follower_velocity / (2.0 * params.a_max);
  return params.headway_floor;
}

namespace {

void check_input(const std::vector<Vehicle>& vehicles) {
  if (vehicles.empty())
    throw std::invalid_argument("build_schedule_model: empty vehicle list");
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    if (vehicles[i].intersection != vehicles.front().intersection)
      throw std::invalid_argument("build_schedule_model: mixed intersection ids");
    if (i > 0 && vehicles[i].distance_to_access < vehicles[i - 1].distance_to_access)
      throw std::invalid_argument("build_schedule_model: list not sorted by distance");
  }
}

/// The disjunction constant must exceed any access-time spread the optimum
/// can produce; serializing every vehicle behind the latest desired/earliest
/// time with full conflict gaps bounds that spread.
double safe_big_m(const std::vector<Vehicle>& vehicles, const SchedulerParams& params,
                  double now) {
  double earliest = now;
  double latest = now;
  for (const auto& v : vehicles) {
    double tmin = v.frozen() ? *v.t_access_assigned : compute_t_access_min(v, params, now);
    double tdes = compute_t_desired(v, params, now);
    earliest = std::min(earliest, tmin);
    latest = std::max(latest, std::max(tmin, tdes));
  }
  double span = latest - earliest + (static_cast<double>(vehicles.size()) + 1.0) * params.t_gap2;
  return std::max(params.big_m, span);
}

}  // namespace

ScheduleModel build_schedule_model(const std::vector<Vehicle>& vehicles,
                                   const SchedulerParams& params, double now) {
  check_input(vehicles);
  const std::size_t n = vehicles.size();

  ScheduleModel out;
  out.big_m_used = safe_big_m(vehicles, params, now);
  milp::MilpModel& m = out.model;

  out.access.reserve(n);
  out.deviation.reserve(n);
  std::vector<double> desired(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vehicle& v = vehicles[i];
    desired[i] = compute_t_desired(v, params, now);
    if (v.frozen()) {
      out.access.push_back(m.add_continuous(*v.t_access_assigned, *v.t_access_assigned));
    } else {
      out.access.push_back(m.add_continuous(compute_t_access_min(v, params, now),
                                            milp::kInfinity));
    }
    out.deviation.push_back(m.add_continuous(0.0, milp::kInfinity));
  }

  // |t_i - t_des,i| linearization.
  for (std::size_t i = 0; i < n; ++i) {
    LinExpr lo;
    lo.add(out.deviation[i], 1.0).add(out.access[i], -1.0);
    m.add_constraint(lo, Sense::GreaterEqual, -desired[i]);
    LinExpr hi;
    hi.add(out.deviation[i], 1.0).add(out.access[i], 1.0);
    m.add_constraint(hi, Sense::GreaterEqual, desired[i]);
  }

  // Same-movement headway between consecutive vehicles (input is
  // distance-sorted, so per movement the subsequence order is the road order).
  std::vector<std::size_t> last_on_movement(4, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t slot = static_cast<std::size_t>(vehicles[i].movement);
    if (last_on_movement[slot] != n) {
      std::size_t k = last_on_movement[slot];
      double gap = compute_t_gap1(vehicles[i].velocity, params, vehicles[i].length);
      LinExpr e;
      e.add(out.access[i], 1.0).add(out.access[k], -1.0);
      m.add_constraint(e, Sense::GreaterEqual, gap);
      if (params.pair_deviation_rows) {
        double lack = gap - (desired[i] - desired[k]);
        if (lack > 1e-9) {
          LinExpr cut;
          cut.add(out.deviation[k], 1.0).add(out.deviation[i], 1.0);
          m.add_constraint(cut, Sense::GreaterEqual, lack);
        }
      }
    }
    last_on_movement[slot] = i;
  }

  // Cross-phase disjunctions, one binary per conflicting pair:
  //   t_a - t_b >= g - M(1-b)   and   t_b - t_a >= g - M b.
  const double big_m = out.big_m_used;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (!conflicting(vehicles[a].phase, vehicles[b].phase)) continue;
      VarId sel = m.add_binary();
      out.cross_pairs.push_back({a, b, sel});
      LinExpr first;
      first.add(out.access[a], 1.0).add(out.access[b], -1.0).add(sel, -big_m);
      m.add_constraint(first, Sense::GreaterEqual, params.t_gap2 - big_m);
      LinExpr second;
      second.add(out.access[b], 1.0).add(out.access[a], -1.0).add(sel, big_m);
      m.add_constraint(second, Sense::GreaterEqual, params.t_gap2);
      if (params.pair_deviation_rows) {
        // Either order implies |t_a - t_b| >= gap, and by the triangle
        // inequality the two desired-time deviations absorb whatever the
        // desired spacing lacks. Holds at every feasible point.
        double lack = params.t_gap2 - std::abs(desired[a] - desired[b]);
        if (lack > 1e-9) {
          LinExpr cut;
          cut.add(out.deviation[a], 1.0).add(out.deviation[b], 1.0);
          m.add_constraint(cut, Sense::GreaterEqual, lack);
        }
      }
    }
  }

  // Makespan term. The furthest subscriber is cv_n.
  LinExpr objective;
  if (params.makespan_mode == MakespanMode::LastVehicleFixed) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      LinExpr e;
      e.add(out.access[n - 1], 1.0).add(out.access[i], -1.0);
      m.add_constraint(e, Sense::GreaterEqual, 0.0);
    }
    objective.add(out.access[n - 1], params.w1);
  } else {
    VarId t_max = m.add_continuous(0.0, milp::kInfinity);
    out.makespan = t_max;
    for (std::size_t i = 0; i < n; ++i) {
      LinExpr e;
      e.add(t_max, 1.0).add(out.access[i], -1.0);
      m.add_constraint(e, Sense::GreaterEqual, 0.0);
    }
    objective.add(t_max, params.w1);
  }
  for (std::size_t i = 0; i < n; ++i) objective.add(out.deviation[i], params.w2);
  objective.add_constant(-params.w1 * now);
  m.set_objective(objective);
  return out;
}

ScheduleResult solve_schedule(const std::vector<Vehicle>& vehicles,
                              const SchedulerParams& params, double now) {
  auto start = std::chrono::steady_clock::now();
  ScheduleModel sm = build_schedule_model(vehicles, params, now);

  ScheduleResult result;
  milp::Solution sol = milp::solve_milp(sm.model, params.solver, &result.stats);
  result.status = sol.status;
  result.objective = sol.objective;
  if (sol.status == milp::SolveStatus::Optimal) {
    for (std::size_t i = 0; i < vehicles.size(); ++i)
      result.assignments[vehicles[i].id] = sol.value(sm.access[i]);
  } else if (sol.status == milp::SolveStatus::Infeasible) {
    // The only way these models go infeasible is mutually conflicting frozen
    // assignments; report the offending pairs.
    for (std::size_t a = 0; a < vehicles.size(); ++a) {
      if (!vehicles[a].frozen()) continue;
      for (std::size_t b = a + 1; b < vehicles.size(); ++b) {
        if (!vehicles[b].frozen()) continue;
        double diff = std::abs(*vehicles[a].t_access_assigned - *vehicles[b].t_access_assigned);
        if (conflicting(vehicles[a].phase, vehicles[b].phase)) {
          if (diff < params.t_gap2 - 1e-9)
            result.conflict_pairs.push_back({vehicles[a].id, vehicles[b].id});
        } else if (vehicles[a].movement == vehicles[b].movement) {
          double gap = compute_t_gap1(vehicles[b].velocity, params, vehicles[b].length);
          if (diff < gap - 1e-9)
            result.conflict_pairs.push_back({vehicles[a].id, vehicles[b].id});
        }
      }
    }
  }
  result.solve_wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<Violation> validate_schedule(const std::vector<Vehicle>& vehicles,
                                         const std::map<VehicleId, double>& assignments,
                                         const SchedulerParams& params, double now) {
  constexpr double kTol = 1e-6;
  std::vector<Violation> out;
  std::vector<const Vehicle*> sorted;
  sorted.reserve(vehicles.size());
  for (const auto& v : vehicles) sorted.push_back(&v);
  std::stable_sort(sorted.begin(), sorted.end(), [](const Vehicle* a, const Vehicle* b) {
    return a->distance_to_access < b->distance_to_access;
  });

  auto time_of = [&](const Vehicle& v) -> const double* {
    auto it = assignments.find(v.id);
    return it == assignments.end() ? nullptr : &it->second;
  };

  for (const Vehicle* v : sorted) {
    const double* t = time_of(*v);
    if (!t) {
      out.push_back({Violation::Kind::MissingAssignment, v->id, v->id, 0.0});
      continue;
    }
    if (v->frozen()) {
      double drift = std::abs(*t - *v->t_access_assigned);
      if (drift > kTol)
        out.push_back({Violation::Kind::FrozenChanged, v->id, v->id, drift});
      continue;
    }
    double tmin = compute_t_access_min(*v, params, now);
    if (*t < tmin - kTol)
      out.push_back({Violation::Kind::KinematicMin, v->id, v->id, tmin - *t});
  }

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double* ti = time_of(*sorted[i]);
    if (!ti) continue;
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const double* tj = time_of(*sorted[j]);
      if (!tj) continue;
      if (conflicting(sorted[i]->phase, sorted[j]->phase)) {
        double diff = std::abs(*tj - *ti);
        if (diff < params.t_gap2 - kTol)
          out.push_back({Violation::Kind::CrossPhaseGap, sorted[i]->id, sorted[j]->id,
                         params.t_gap2 - diff});
      }
    }
  }

  // Same-movement consecutive pairs in distance order.
  std::vector<const Vehicle*> last(4, nullptr);
  for (const Vehicle* v : sorted) {
    std::size_t slot = static_cast<std::size_t>(v->movement);
    const Vehicle* prev = last[slot];
    if (prev) {
      const double* tv = time_of(*v);
      const double* tp = time_of(*prev);
      if (tv && tp) {
        double gap = compute_t_gap1(v->velocity, params, v->length);
        if (*tv - *tp < gap - kTol)
          out.push_back({Violation::Kind::SameMovementGap, prev->id, v->id,
                         gap - (*tv - *tp)});
      }
    }
    last[slot] = v;
  }
  return out;
}

const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::MissingAssignment: return "missing-assignment";
    case Violation::Kind::KinematicMin: return "kinematic-min";
    case Violation::Kind::SameMovementGap: return "same-movement-gap";
    case Violation::Kind::CrossPhaseGap: return "cross-phase-gap";
    case Violation::Kind::FrozenChanged: return "frozen-changed";
  }
  return "?";
}

}  // namespace aim::sched
