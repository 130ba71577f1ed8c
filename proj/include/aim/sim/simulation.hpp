#ifndef AIM_SIM_SIMULATION_HPP
#define AIM_SIM_SIMULATION_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aim/coordination/controller.hpp"
#include "aim/coordination/topology.hpp"
#include "aim/metrics/metrics.hpp"
#include "aim/scheduler/scheduler.hpp"
#include "aim/sim/signal_plan.hpp"

namespace aim::sim {

/// A: fixed-time signals, 300 m camera detection.
/// B: fixed-time signals, communicated timing + speed advisory within 400 m.
/// C: MILP control, no coordination between intersections.
/// D: MILP control with neighbor handoffs.
enum class Testbed { A, B, C, D };

const char* to_string(Testbed t);
std::optional<Testbed> testbed_from_string(const std::string& s);
inline bool milp_testbed(Testbed t) { return t == Testbed::C || t == Testbed::D; }

struct SimConfig {
  int grid_rows = 3;
  int grid_cols = 3;
  double link_length = 400.0;  // m
  double duration = 3600.0;    // s
  double dt = 0.1;             // s
  double control_period = 6.0;
  std::vector<double> injection_rates_vph;  // one per boundary entry link
  Testbed testbed = Testbed::A;
  std::uint64_t seed = 1;
  sched::SchedulerParams scheduler;  // carries v_max, v_avg, a_max
  metrics::FuelModelParams fuel;
  int iterations_per_round = 1;

  // Fixed-time testbeds.
  double camera_range = 300.0;     // m, testbed A signal detection
  double advisory_range = 400.0;   // m, testbed B timing knowledge
  double queue_info_range = 300.0;  // m, testbed B queue knowledge
  double discharge_headway = 2.0;  // s per queued vehicle
  double saturation_flow = 1800.0;  // vphpl for the Webster plan
  double amber = 3.0;
  double all_red = 1.0;

  // Car following and spawning.
  double vehicle_length = 5.0;
  double min_gap = 2.0;            // m bumper-to-bumper floor
  double min_spawn_headway = 2.0;  // s between injections on one entry
  double tracking_gain = 0.5;      // 1/s proportional speed tracking

  bool record_transcript = false;

  double v_max() const { return scheduler.v_max; }
  double v_avg() const { return scheduler.v_avg; }
  double a_max() const { return scheduler.a_max; }

  /// Throws std::invalid_argument with every problem listed, not just the first.
  void validate() const;
};

/// Raised when a hard safety invariant breaks mid-run (conflicting vehicles
/// inside one intersection box, a negative bumper gap, or a red-light
/// crossing). Not recoverable.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimCounters {
  std::int64_t hard_gate_stops = 0;        // emergency holds at a stop bar
  std::int64_t controller_fallbacks = 0;   // infeasible node solves
  std::int64_t unreachable_assignments = 0;
  std::uint64_t lp_solves = 0;
  std::uint64_t bb_nodes = 0;
  std::uint64_t simplex_pivots = 0;
};

struct SimResult {
  metrics::MetricsReport report;
  SimCounters counters;
  std::string transcript_jsonl;  // when record_transcript and a MILP testbed
};

/// Runs the microsimulation. Optional sinks receive the per-step trajectory
/// rows and the per-crossing event rows as CSV.
SimResult run_simulation(const SimConfig& config, std::ostream* trajectory_csv = nullptr,
                         std::ostream* events_csv = nullptr);

// --- Pure pieces, exposed for tests -----------------------------------------

/// Trapezoidal kinematic step with acceleration and speed clamps.
struct StepResult {
  double velocity = 0.0;
  double delta_pos = 0.0;
};
StepResult step_vehicle(double velocity, double accel_command, double dt, double v_max,
                        double a_max);

/// Largest speed after one step that keeps the braking-distance envelope to a
/// leader moving at leader_v with `gap` meters of free road.
double safe_speed(double gap, double leader_v, double a_max, double dt, double min_gap);

/// Speed-tracking acceleration toward the access point under an assigned
/// access time; full throttle when the assignment is already unreachable.
double tracking_accel(double distance_to_access, double velocity, double t_access, double now,
                      double gain, double v_max, double a_max, bool* unreachable = nullptr);

/// Testbed B advisory: target speed that arrives inside a green window,
/// planning at the preferred cruise speed and slowing only to avoid a red
/// arrival; queue-discharge delay pushes the usable window start.
double advisory_speed(double distance_to_bar, double now, const SignalPlan& plan, Phase phase,
                      double v_preferred, double v_max, int queue_size,
                      double discharge_headway, double margin = 0.5);

/// Per-intersection Webster plans for the grid, derived from the injection
/// rates carried straight along each corridor.
std::vector<SignalPlan> grid_signal_plans(const SimConfig& config,
                                          const coord::GridTopology& topology);

}  // namespace aim::sim

#endif  // AIM_SIM_SIMULATION_HPP
