#include "aim/coordination/controller.hpp"

#include <algorithm>
#include <stdexcept>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>

#include "aim/milp/lp_format.hpp"
#include "aim/util/text.hpp"

namespace aim::coord {

double handoff_desired_time(double t_access_at_k, double link_travel_time) {
  if (!(link_travel_time > 0.0))
    throw std::invalid_argument("handoff_desired_time: travel time must be positive");
  return t_access_at_k + link_travel_time;
}

const char* to_string(ControlMessage::Kind k) {
  switch (k) {
    case ControlMessage::Kind::Subscribe: return "subscribe";
    case ControlMessage::Kind::Unsubscribe: return "unsubscribe";
    case ControlMessage::Kind::AccessAssignment: return "access-assignment";
    case ControlMessage::Kind::NeighborHandoff: return "neighbor-handoff";
  }
  return "?";
}

ControllerNetwork::ControllerNetwork(const GridTopology& topology,
                                     const sched::SchedulerParams& params,
                                     CoordinationMode mode, int iterations_per_round)
    : topology_(&topology),
      params_(params),
      mode_(mode),
      iterations_per_round_(iterations_per_round) {
  if (iterations_per_round < 1)
    throw std::invalid_argument("iterations_per_round must be at least 1");
  for (const auto& info : topology.intersections()) {
    NodeState st;
    st.id = info.id;
    nodes_.emplace(info.id.value, std::move(st));
  }
}

NodeState& ControllerNetwork::node_mut(IntersectionId id) {
  auto it = nodes_.find(id.value);
  if (it == nodes_.end()) throw std::out_of_range("unknown intersection " + id.label());
  return it->second;
}

const NodeState& ControllerNetwork::node(IntersectionId id) const {
  auto it = nodes_.find(id.value);
  if (it == nodes_.end()) throw std::out_of_range("unknown intersection " + id.label());
  return it->second;
}

void ControllerNetwork::log(ControlMessage msg) {
  if (transcript_enabled_) transcript_.push_back(std::move(msg));
}

void ControllerNetwork::subscribe(const sched::Vehicle& vehicle, double now) {
  NodeState& st = node_mut(vehicle.intersection);
  st.subscribers[vehicle.id] = vehicle;
  ControlMessage m;
  m.kind = ControlMessage::Kind::Subscribe;
  m.round = rounds_run_;
  m.iteration = -1;
  m.time = now;
  m.sender = "cv" + std::to_string(vehicle.id);
  m.receiver = vehicle.intersection.label();
  m.vehicle = vehicle.id;
  m.intended_arrival = sched::compute_t_desired(vehicle, params_, now);
  log(std::move(m));
}

void ControllerNetwork::unsubscribe(IntersectionId node_id, VehicleId vehicle, double now) {
  NodeState& st = node_mut(node_id);
  st.subscribers.erase(vehicle);
  ControlMessage m;
  m.kind = ControlMessage::Kind::Unsubscribe;
  m.round = rounds_run_;
  m.iteration = -1;
  m.time = now;
  m.sender = "cv" + std::to_string(vehicle);
  m.receiver = node_id.label();
  m.vehicle = vehicle;
  log(std::move(m));
}

void ControllerNetwork::update_subscriber(IntersectionId node_id, VehicleId vehicle,
                                          double distance, double velocity) {
  NodeState& st = node_mut(node_id);
  auto it = st.subscribers.find(vehicle);
  if (it == st.subscribers.end()) return;
  it->second.distance_to_access = std::max(0.0, distance);
  it->second.velocity = velocity;
}

std::vector<sched::Vehicle> ControllerNetwork::assemble(const NodeState& st) const {
  std::vector<sched::Vehicle> list;
  list.reserve(st.subscribers.size() + st.inbox.size());
  for (const auto& [id, v] : st.subscribers) list.push_back(v);
  if (mode_ == CoordinationMode::Coordinated) {
    for (const auto& e : st.inbox) {
      if (st.subscribers.count(e.vehicle)) continue;  // became primary meanwhile
      sched::Vehicle v;
      v.id = e.vehicle;
      v.intersection = st.id;
      v.movement = e.movement;
      v.phase = phase_of(e.movement);
      v.distance_to_access = e.distance_at_downstream;
      v.velocity = e.velocity;
      v.length = e.vehicle_length;
      v.desired_override = e.t_desired_downstream;
      list.push_back(v);
    }
  }
  // Vehicles inside the access area all report distance zero; their road
  // order is their assignment order (the access hold admits them in assigned
  // sequence), so assigned time breaks the tie.
  std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
    if (a.distance_to_access != b.distance_to_access)
      return a.distance_to_access < b.distance_to_access;
    double ta = a.t_access_assigned.value_or(std::numeric_limits<double>::infinity());
    double tb = b.t_access_assigned.value_or(std::numeric_limits<double>::infinity());
    if (ta != tb) return ta < tb;
    return a.id < b.id;
  });
  return list;
}

RoundOutcome ControllerNetwork::run_round(double now) {
  RoundOutcome out;
  out.round = rounds_run_;

  for (int iter = 0; iter < iterations_per_round_; ++iter) {
    IterationResult ir;

    for (auto& [key, st] : nodes_) {
      NodeRoundResult nr;
      nr.node = st.id;
      std::vector<sched::Vehicle> list = assemble(st);
      if (list.empty()) {
        nr.schedule.status = milp::SolveStatus::Optimal;
        ir.nodes.push_back(std::move(nr));
        continue;
      }
      nr.schedule = sched::solve_schedule(list, params_, now);
      nr.solved_list = list;
      static const bool trace = std::getenv("AIM_TRACE_SOLVES") != nullptr;
      if (trace && nr.schedule.solve_wall_time > 0.05)
        std::fprintf(stderr, "t=%.0f %s n=%zu nodes=%llu pivots=%llu wall=%.0fms %s\n", now,
                     st.id.label().c_str(), list.size(),
                     (unsigned long long)nr.schedule.stats.nodes,
                     (unsigned long long)nr.schedule.stats.pivots,
                     nr.schedule.solve_wall_time * 1e3, milp::to_string(nr.schedule.status));
      if (nr.schedule.status == milp::SolveStatus::Optimal) {
        for (const auto& v : list) {
          double t = nr.schedule.assignments.at(v.id);
          auto sub = st.subscribers.find(v.id);
          bool is_primary = sub != st.subscribers.end();
          if (is_primary) {
            sub->second.t_access_assigned = t;
            nr.primary[v.id] = t;
          } else {
            nr.phantom[v.id] = t;
          }
          ControlMessage m;
          m.kind = ControlMessage::Kind::AccessAssignment;
          m.round = rounds_run_;
          m.iteration = iter;
          m.time = now;
          m.sender = st.id.label();
          m.receiver = "cv" + std::to_string(v.id);
          m.vehicle = v.id;
          m.t_access = t;
          m.tentative = !is_primary;
          log(std::move(m));
        }
        st.last_result = nr.schedule;
      } else {
        // A node failure must not abort the other nodes: subscribers keep
        // their previous assignments, anything never assigned is reported.
        nr.fallback = true;
        for (const auto& [vid, v] : st.subscribers) {
          if (v.t_access_assigned)
            nr.primary[vid] = *v.t_access_assigned;
          else
            nr.unassigned.push_back(vid);
        }
      }
      ir.nodes.push_back(std::move(nr));
    }

    // Exchange barrier: handoffs computed from this iteration's assignments
    // are visible to the next solve (next iteration here, or the next round
    // when this was the last one).
    std::map<std::int32_t, std::vector<HandoffEntry>> fresh;
    if (mode_ == CoordinationMode::Coordinated) {
      for (auto& [key, st] : nodes_) {
        std::map<std::int32_t, std::vector<HandoffEntry>> outgoing;
        for (const auto& [vid, v] : st.subscribers) {
          if (!v.t_access_assigned) continue;
          auto link_id = topology_->continuation(st.id, v.movement);
          if (!link_id) continue;
          const Link& l = topology_->link(*link_id);
          if (!l.to) continue;  // boundary sink
          const auto& g_from = topology_->intersection(st.id).geometry;
          const auto& g_to = topology_->intersection(*l.to).geometry;
          HandoffEntry e;
          e.vehicle = vid;
          e.from = st.id;
          e.to = *l.to;
          e.movement = v.movement;
          e.t_access_upstream = *v.t_access_assigned;
          e.link_length = l.length;
          e.t_desired_downstream =
              handoff_desired_time(*v.t_access_assigned, l.length / params_.v_avg);
          e.distance_at_downstream = v.distance_to_access + g_from.d_access + g_from.width +
                                     l.length - g_to.d_access;
          e.velocity = v.velocity;
          e.vehicle_length = v.length;
          outgoing[l.to->value].push_back(e);
        }
        for (auto& [to, entries] : outgoing) {
          ControlMessage m;
          m.kind = ControlMessage::Kind::NeighborHandoff;
          m.round = rounds_run_;
          m.iteration = iter;
          m.time = now;
          m.sender = st.id.label();
          m.receiver = IntersectionId{to}.label();
          m.entries = entries;
          log(std::move(m));
          auto& box = fresh[to];
          box.insert(box.end(), entries.begin(), entries.end());
        }
      }
    }
    for (auto& [key, st] : nodes_) {
      auto it = fresh.find(key);
      st.inbox = it == fresh.end() ? std::vector<HandoffEntry>{} : std::move(it->second);
    }

    out.iterations.push_back(std::move(ir));
  }

  ++rounds_run_;
  return out;
}

std::vector<std::pair<IntersectionId, std::string>> ControllerNetwork::export_models(
    double now) const {
  std::vector<std::pair<IntersectionId, std::string>> out;
  for (const auto& [key, st] : nodes_) {
    std::vector<sched::Vehicle> list = assemble(st);
    if (list.empty()) {
      milp::MilpModel empty;
      empty.add_continuous(0.0, 0.0);
      out.emplace_back(st.id, milp::export_lp_text(empty));
      continue;
    }
    sched::ScheduleModel sm = sched::build_schedule_model(list, params_, now);
    out.emplace_back(st.id, milp::export_lp_text(sm.model));
  }
  return out;
}

std::string ControllerNetwork::transcript_jsonl() const {
  std::string out;
  for (const auto& m : transcript_) {
    nlohmann::ordered_json j;
    j["round"] = m.round;
    j["iteration"] = m.iteration;
    j["time"] = m.time;
    j["kind"] = to_string(m.kind);
    j["sender"] = m.sender;
    j["receiver"] = m.receiver;
    switch (m.kind) {
      case ControlMessage::Kind::Subscribe:
        j["vehicle"] = m.vehicle;
        j["intended_arrival"] = m.intended_arrival;
        break;
      case ControlMessage::Kind::Unsubscribe:
        j["vehicle"] = m.vehicle;
        break;
      case ControlMessage::Kind::AccessAssignment:
        j["vehicle"] = m.vehicle;
        j["t_access"] = m.t_access;
        j["tentative"] = m.tentative;
        break;
      case ControlMessage::Kind::NeighborHandoff: {
        nlohmann::ordered_json list = nlohmann::ordered_json::array();
        for (const auto& e : m.entries) {
          nlohmann::ordered_json je;
          je["vehicle"] = e.vehicle;
          je["movement"] = aim::to_string(e.movement);
          je["t_access_upstream"] = e.t_access_upstream;
          je["link_length"] = e.link_length;
          je["t_desired_downstream"] = e.t_desired_downstream;
          je["distance_at_downstream"] = e.distance_at_downstream;
          list.push_back(std::move(je));
        }
        j["entries"] = std::move(list);
        break;
      }
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace aim::coord
