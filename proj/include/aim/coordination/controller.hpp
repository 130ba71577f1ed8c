#ifndef AIM_COORDINATION_CONTROLLER_HPP
#define AIM_COORDINATION_CONTROLLER_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aim/coordination/topology.hpp"
#include "aim/core/types.hpp"
#include "aim/scheduler/scheduler.hpp"

namespace aim::coord {

enum class CoordinationMode { Uncoordinated, Coordinated };

/// Anticipated desired access time at the downstream intersection: the
/// assigned access time at the current one plus the inter-intersection
/// travel time.
double handoff_desired_time(double t_access_at_k, double link_travel_time);

/// One vehicle's entry in a neighbor handoff message.
struct HandoffEntry {
  VehicleId vehicle = 0;
  IntersectionId from, to;
  Movement movement = Movement::East;
  double t_access_upstream = 0.0;
  double link_length = 0.0;
  double t_desired_downstream = 0.0;
  double distance_at_downstream = 0.0;  // m, to the downstream access point
  double velocity = 0.0;
  double vehicle_length = 5.0;
};

struct ControlMessage {
  enum class Kind { Subscribe, Unsubscribe, AccessAssignment, NeighborHandoff };
  Kind kind = Kind::Subscribe;
  int round = 0;      // round the message belongs to
  int iteration = 0;  // exchange iteration within the round; -1 between rounds
  double time = 0.0;
  std::string sender;
  std::string receiver;
  VehicleId vehicle = 0;           // Subscribe/Unsubscribe/AccessAssignment
  double t_access = 0.0;           // AccessAssignment
  double intended_arrival = 0.0;   // Subscribe
  bool tentative = false;          // AccessAssignment for a not-yet-subscribed vehicle
  std::vector<HandoffEntry> entries;  // NeighborHandoff
};

const char* to_string(ControlMessage::Kind k);

struct NodeState {
  IntersectionId id;
  std::map<VehicleId, sched::Vehicle> subscribers;
  std::vector<HandoffEntry> inbox;  // handoffs from the previous exchange
  std::optional<sched::ScheduleResult> last_result;
};

struct NodeRoundResult {
  IntersectionId node;
  sched::ScheduleResult schedule;
  std::vector<sched::Vehicle> solved_list;  // exact list the node solved over
  std::map<VehicleId, double> primary;  // assignments to own subscribers
  std::map<VehicleId, double> phantom;  // tentative times for handed-off vehicles
  bool fallback = false;                // infeasible solve, previous times kept
  std::vector<VehicleId> unassigned;    // subscribers left without any time
};

struct IterationResult {
  std::vector<NodeRoundResult> nodes;
};

struct RoundOutcome {
  int round = 0;
  std::vector<IterationResult> iterations;
};

/// One controller per intersection, lock-step rounds, round-buffered
/// handoff mailboxes. Node solves within a round are independent;
/// results do not depend on the order they execute in.
class ControllerNetwork {
 public:
  ControllerNetwork(const GridTopology& topology, const sched::SchedulerParams& params,
                    CoordinationMode mode, int iterations_per_round = 1);

  void subscribe(const sched::Vehicle& vehicle, double now);
  void unsubscribe(IntersectionId node, VehicleId vehicle, double now);
  void update_subscriber(IntersectionId node, VehicleId vehicle, double distance,
                         double velocity);

  RoundOutcome run_round(double now);

  const NodeState& node(IntersectionId id) const;
  CoordinationMode mode() const { return mode_; }
  int rounds_run() const { return rounds_run_; }

  const std::vector<ControlMessage>& transcript() const { return transcript_; }
  std::string transcript_jsonl() const;
  void set_transcript_enabled(bool on) { transcript_enabled_ = on; }

  /// LP text of the model each node would solve right now (for export).
  std::vector<std::pair<IntersectionId, std::string>> export_models(double now) const;

 private:
  NodeState& node_mut(IntersectionId id);
  std::vector<sched::Vehicle> assemble(const NodeState& st) const;
  void log(ControlMessage msg);

  const GridTopology* topology_;
  sched::SchedulerParams params_;
  CoordinationMode mode_;
  int iterations_per_round_;
  int rounds_run_ = 0;
  std::map<std::int32_t, NodeState> nodes_;
  std::vector<ControlMessage> transcript_;
  bool transcript_enabled_ = true;
};

}  // namespace aim::coord

#endif  // AIM_COORDINATION_CONTROLLER_HPP
