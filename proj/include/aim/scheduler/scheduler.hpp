#ifndef AIM_SCHEDULER_SCHEDULER_HPP
#define AIM_SCHEDULER_SCHEDULER_HPP

#include <map>
#include <optional>
#include <vector>

#include "aim/core/types.hpp"
#include "aim/milp/model.hpp"
#include "aim/milp/solver.hpp"

namespace aim::sched {

/// Connected-vehicle snapshot as subscribed to one intersection controller.
struct Vehicle {
  VehicleId id = 0;
  IntersectionId intersection;
  Movement movement = Movement::East;
  Phase phase = Phase::X;
  double distance_to_access = 0.0;  // m to the access point, >= 0
  double velocity = 0.0;            // m/s
  std::optional<double> t_access_assigned;
  std::optional<double> t_exit;
  double length = 5.0;  // m
  /// Desired access time handed over from a neighboring controller; when
  /// absent the desired time is distance / v_avg from now.
  std::optional<double> desired_override;

  /// Vehicles already past the access point keep their previous assignment
  /// fixed in later solves.
  bool frozen() const { return t_access_assigned.has_value() && distance_to_access <= 0.0; }
};

enum class MakespanMode {
  /// Faithful reading of the makespan objective: the furthest subscribed
  /// vehicle is constrained to arrive last and its access time is minimized.
  LastVehicleFixed,
  /// Auxiliary makespan variable bounded below by every access time.
  FreeMax,
};

struct SchedulerParams {
  double w1 = 1.0;             // makespan weight
  double w2 = 1.0;             // desired-deviation weight (per vehicle)
  double t_gap2 = 7.5;         // s, cross-phase separation
  double v_max = 20.1167;      // m/s (72.4 kph)
  double v_avg = 15.6389;      // m/s (56.3 kph)
  double a_max = 2.0;          // m/s^2
  double big_m = 207.5;        // s, floor for the disjunction constant
  double headway_floor = 1.0;  // s, same-movement headway at cruise
  double v_still = 2.0;        // m/s, below this the body-clearance rule applies
  double v_slow = 10.0;        // m/s, above this the floor headway applies
  MakespanMode makespan_mode = MakespanMode::LastVehicleFixed;
  /// Adds the implied pairwise deviation rows (e_a + e_b >= gap - |des_a -
  /// des_b|). They hold at every feasible point of the disjunctive model, so
  /// the optimum is unchanged, but the relaxation prices conflicts and the
  /// search tree collapses.
  bool pair_deviation_rows = true;
  milp::SolverOptions solver;
};

struct IntersectionGeometry {
  double width = 10.0;     // m
  double d_access = 92.4;  // m, access-area depth
};

/// Stopping distance at v_avg plus a two-second reaction buffer.
double default_access_distance(double v_avg, double a_max);

/// Earliest arrival at the access point under the accelerate-then-cruise
/// envelope (a_max until v_max, then hold).
double compute_t_access_min(const Vehicle& vehicle, const SchedulerParams& params, double now);

/// Desired access time: now + distance / v_avg, unless a neighbor handoff
/// supplied one.
double compute_t_desired(const Vehicle& vehicle, const SchedulerParams& params, double now);

/// Same-movement headway as a function of the follower's velocity.
double compute_t_gap1(double follower_velocity, const SchedulerParams& params,
                      double vehicle_length);

/// Schedule MILP plus the variable map back to vehicles (in input order).
struct ScheduleModel {
  milp::MilpModel model;
  std::vector<milp::VarId> access;     // t_i per vehicle
  std::vector<milp::VarId> deviation;  // e_i per vehicle
  std::optional<milp::VarId> makespan;  // FreeMax only
  struct CrossPair {
    std::size_t a, b;  // vehicle indices
    milp::VarId selector;
  };
  std::vector<CrossPair> cross_pairs;
  double big_m_used = 0.0;
};

/// Builds the access-time MILP for one intersection's subscriber list.
/// Requires a non-empty list sorted ascending by distance, all on the same
/// intersection.
ScheduleModel build_schedule_model(const std::vector<Vehicle>& vehicles,
                                   const SchedulerParams& params, double now);

struct ScheduleResult {
  std::map<VehicleId, double> assignments;
  double objective = 0.0;
  milp::SolveStatus status = milp::SolveStatus::Infeasible;
  double solve_wall_time = 0.0;  // s
  milp::SolveStats stats;
  /// Frozen pairs that violate a gap constraint; filled when infeasible.
  std::vector<std::pair<VehicleId, VehicleId>> conflict_pairs;
};

ScheduleResult solve_schedule(const std::vector<Vehicle>& vehicles,
                              const SchedulerParams& params, double now);

struct Violation {
  enum class Kind {
    MissingAssignment,
    KinematicMin,
    SameMovementGap,
    CrossPhaseGap,
    FrozenChanged,
  };
  Kind kind;
  VehicleId first = 0;
  VehicleId second = 0;  // equals first for unary checks
  double amount = 0.0;   // s by which the constraint is violated
};

/// Independent checker: recomputes every constraint from the raw vehicle
/// data; empty result means all constraints hold within 1e-6.
std::vector<Violation> validate_schedule(const std::vector<Vehicle>& vehicles,
                                         const std::map<VehicleId, double>& assignments,
                                         const SchedulerParams& params, double now);

const char* to_string(Violation::Kind k);

}  // namespace aim::sched

#endif  // AIM_SCHEDULER_SCHEDULER_HPP
