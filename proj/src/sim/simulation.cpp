#include "aim/sim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <ostream>

#include "aim/util/text.hpp"

namespace aim::sim {

const char* to_string(Testbed t) {
  switch (t) {
    case Testbed::A: return "A";
    case Testbed::B: return "B";
    case Testbed::C: return "C";
    case Testbed::D: return "D";
  }
  return "?";
}

std::optional<Testbed> testbed_from_string(const std::string& s) {
  if (s == "A" || s == "a") return Testbed::A;
  if (s == "B" || s == "b") return Testbed::B;
  if (s == "C" || s == "c") return Testbed::C;
  if (s == "D" || s == "d") return Testbed::D;
  return std::nullopt;
}

void SimConfig::validate() const {
  std::vector<std::string> problems;
  if (grid_rows < 1 || grid_cols < 1) problems.push_back("grid must be at least 1x1");
  if (!(duration > 0.0)) problems.push_back("duration must be positive");
  if (!(dt > 0.0)) problems.push_back("dt must be positive");
  if (dt > 0.0) {
    double steps = control_period / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9)
      problems.push_back("dt must divide control_period");
  }
  if (!(control_period > 0.0)) problems.push_back("control_period must be positive");
  if (!(link_length > 0.0)) problems.push_back("link_length must be positive");
  std::size_t entries = 2u * (grid_rows + grid_cols);
  if (injection_rates_vph.size() != entries)
    problems.push_back("injection_rates_vph needs one rate per boundary entry (" +
                       std::to_string(entries) + ")");
  for (double r : injection_rates_vph)
    if (r < 0.0 || !std::isfinite(r)) problems.push_back("injection rates must be >= 0");
  if (!(scheduler.v_avg > 0.0) || scheduler.v_avg > scheduler.v_max)
    problems.push_back("need 0 < v_avg <= v_max");
  if (!(scheduler.a_max > 0.0)) problems.push_back("a_max must be positive");
  if (!(scheduler.t_gap2 > 0.0)) problems.push_back("t_gap2 must be positive");
  if (scheduler.w1 < 0.0 || scheduler.w2 < 0.0 || (scheduler.w1 == 0.0 && scheduler.w2 == 0.0))
    problems.push_back("weights must be nonnegative and not both zero");
  if (!(amber > 0.0) || !(all_red >= 0.0)) problems.push_back("bad signal change timing");
  if (iterations_per_round < 1) problems.push_back("iterations_per_round must be >= 1");
  if (!problems.empty()) {
    std::string msg = "invalid simulation config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw std::invalid_argument(msg);
  }
}

StepResult step_vehicle(double velocity, double accel_command, double dt, double v_max,
                        double a_max) {
  double a = std::clamp(accel_command, -a_max, a_max);
  double v_new = std::clamp(velocity + a * dt, 0.0, v_max);
  return {v_new, 0.5 * (velocity + v_new) * dt};
}

double safe_speed(double gap, double leader_v, double a_max, double dt, double min_gap) {
  double free = gap - min_gap;
  if (free <= 0.0) return 0.0;
  double ad = a_max * dt;
  double v = -ad + std::sqrt(ad * ad + leader_v * leader_v + 2.0 * a_max * free);
  return std::max(0.0, v);
}

double tracking_accel(double distance_to_access, double velocity, double t_access, double now,
                      double gain, double v_max, double a_max, bool* unreachable) {
  if (unreachable) *unreachable = false;
  if (distance_to_access <= 0.0) return gain * (v_max - velocity);
  double remaining = t_access - now;
  if (remaining <= 0.0) {
    if (unreachable) *unreachable = true;
    return a_max;
  }
  double target = distance_to_access / remaining;
  if (target > v_max) {
    if (unreachable) *unreachable = true;
    return a_max;
  }
  return std::clamp(gain * (target - velocity), -a_max, a_max);
}

double advisory_speed(double distance_to_bar, double now, const SignalPlan& plan, Phase phase,
                      double v_preferred, double v_max, int queue_size,
                      double discharge_headway, double margin) {
  if (distance_to_bar <= 0.0) return v_preferred;
  double earliest = now + distance_to_bar / v_preferred;
  double search = now;
  for (int k = 0; k < 6; ++k) {
    auto [gs, ge] = plan.next_green(phase, search);
    double start = gs + queue_size * discharge_headway + margin;
    double t_star = std::max(earliest, start);
    if (t_star <= ge - margin)
      return std::clamp(distance_to_bar / (t_star - now), 0.0, v_max);
    search = ge + 0.1;
  }
  return 2.0;  // oversaturated approach: creep toward the queue
}

std::vector<SignalPlan> grid_signal_plans(const SimConfig& config,
                                          const coord::GridTopology& topology) {
  // Flow per (intersection, movement): corridors carry their entry rate
  // straight through the grid.
  std::map<std::pair<std::int32_t, int>, double> flow;
  const auto& entries = topology.entry_links();
  for (std::size_t e = 0; e < entries.size(); ++e) {
    double rate = config.injection_rates_vph[e];
    const coord::Link* l = &topology.link(entries[e]);
    while (l->to) {
      flow[{l->to->value, static_cast<int>(l->movement)}] += rate;
      auto next = topology.continuation(*l->to, l->movement);
      if (!next) break;
      l = &topology.link(*next);
    }
  }
  std::vector<SignalPlan> plans;
  for (const auto& info : topology.intersections()) {
    auto get = [&](Movement m) {
      auto it = flow.find({info.id.value, static_cast<int>(m)});
      return it == flow.end() ? 0.0 : it->second;
    };
    plans.push_back(webster_plan(get(Movement::East), get(Movement::West),
                                 get(Movement::North), get(Movement::South),
                                 config.saturation_flow, config.amber, config.all_red));
  }
  return plans;
}

namespace {

constexpr double kBarStandoff = 0.5;  // m a stopping vehicle leaves before a bar
constexpr double kAccessStandoff = 0.3;

struct StopGeom {
  IntersectionId node;
  std::size_t node_idx = 0;  // index into topology.intersections()
  double access = 0.0;
  double bar = 0.0;
  double box_exit = 0.0;
  std::int32_t approach_link = -1;
};

struct CorridorGeom {
  Movement movement = Movement::East;
  std::vector<StopGeom> stops;
  double remove_pos = 0.0;
  std::int32_t exit_link = -1;
  double rate_vph = 0.0;
};

struct Agent {
  VehicleId id = 0;
  int corridor = -1;
  std::size_t stop_idx = 0;
  double front = 0.0;
  double v = 0.0;
  double a = 0.0;
  double length = 5.0;
  double spawn_time = 0.0;
  std::optional<double> assigned;       // access time at the current stop
  std::optional<double> next_assigned;  // tentative time at the next stop (D)
  struct StopEvents {
    double realized_access = -1.0;
    double t_enter = -1.0;
    double t_exit = -1.0;
    double final_assigned = std::numeric_limits<double>::quiet_NaN();
  };
  bool committed = false;      // holds a box claim for the current stop
  bool stall_counted = false;  // gate-stall diagnostic emitted once per stop
  std::vector<StopEvents> events;
  metrics::StopCounter stop_counter;
  double fuel_g = 0.0;
  double distance = 0.0;
  double completed_at = -1.0;
  bool metrics_frozen = false;
  bool removed = false;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class Xoshiro {
 public:
  explicit Xoshiro(std::uint64_t seed) {
    for (auto& w : s_) w = splitmix64(seed = splitmix64(seed));
  }
  std::uint64_t next() {
    std::uint64_t result = s_[0] + s_[3];
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = (s_[3] << 45) | (s_[3] >> 19);
    return result;
  }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t s_[4];
};

class World {
 public:
  World(const SimConfig& config, std::ostream* trajectory_csv, std::ostream* events_csv)
      : cfg_(config),
        topology_(coord::GridTopology::regular_grid(
            config.grid_rows, config.grid_cols, config.link_length, make_geometry(config))),
        trajectory_csv_(trajectory_csv),
        events_csv_(events_csv) {
    std::size_t n = topology_.intersections().size();
    for (std::size_t i = 0; i < n; ++i)
      node_index_[topology_.intersections()[i].id.value] = i;
    box_count_.assign(n, {0, 0});
    claims_.assign(n, {0, 0});
    queue_count_.assign(n, {});
    queue_series_x_.assign(n, {});
    queue_series_o_.assign(n, {});
    build_corridors();
    if (milp_testbed(cfg_.testbed)) {
      params_ = cfg_.scheduler;
      net_.emplace(topology_,
                   params_,
                   cfg_.testbed == Testbed::D ? coord::CoordinationMode::Coordinated
                                              : coord::CoordinationMode::Uncoordinated,
                   cfg_.iterations_per_round);
      net_->set_transcript_enabled(cfg_.record_transcript);
    } else {
      plans_ = grid_signal_plans(cfg_, topology_);
    }
    if (trajectory_csv_)
      *trajectory_csv_ << "vehicle,time,position,velocity,acceleration,link,context\n";
  }

  SimResult run() {
    const double dt = cfg_.dt;
    const std::int64_t steps = static_cast<std::int64_t>(std::llround(cfg_.duration / dt));
    const std::int64_t round_steps =
        static_cast<std::int64_t>(std::llround(cfg_.control_period / dt));
    const std::int64_t second_steps = static_cast<std::int64_t>(std::llround(1.0 / dt));

    for (std::int64_t step = 0; step < steps; ++step) {
      double t = step * dt;
      update_queue_counts();
      if (net_ && step % round_steps == 0) control_round(t);
      inject(t);
      std::vector<double> commands = compute_commands(t);
      integrate(t, commands, dt);
      check_invariants(t);
      record(t, dt);
      if (step % second_steps == 0) sample_queues();
      sweep_removals();
    }
    return finalize();
  }

 private:
  static sched::IntersectionGeometry make_geometry(const SimConfig& config) {
    sched::IntersectionGeometry g;
    g.width = 10.0;
    g.d_access = sched::default_access_distance(config.v_avg(), config.a_max());
    return g;
  }

  void build_corridors() {
    const auto& entries = topology_.entry_links();
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const coord::Link* l = &topology_.link(entries[e]);
      CorridorGeom c;
      c.movement = l->movement;
      c.rate_vph = cfg_.injection_rates_vph[e];
      double pos = 0.0;
      while (true) {
        pos += l->length;
        if (!l->to) break;
        const auto& info = topology_.intersection(*l->to);
        StopGeom s;
        s.node = *l->to;
        s.node_idx = node_index_.at(l->to->value);
        s.bar = pos;
        s.access = pos - info.geometry.d_access;
        s.box_exit = pos + info.geometry.width;
        s.approach_link = l->id.value;
        c.stops.push_back(s);
        pos += info.geometry.width;
        auto next = topology_.continuation(*l->to, l->movement);
        if (!next) break;
        l = &topology_.link(*next);
      }
      c.exit_link = l->id.value;
      c.remove_pos = c.stops.empty() ? pos : c.stops.back().box_exit +
                                                cfg_.vehicle_length + 10.0;
      corridors_.push_back(std::move(c));
      lanes_.emplace_back();
      Xoshiro rng(splitmix64(cfg_.seed) ^ splitmix64(0x5151u + e));
      rngs_.push_back(rng);
      next_arrival_.push_back(draw_gap(rngs_.back(), c.rate_vph));
    }
  }

  double draw_gap(Xoshiro& rng, double rate_vph) {
    if (rate_vph <= 0.0) return 2.0 * cfg_.duration + 100.0;
    double u = rng.uniform();
    double gap = -std::log(1.0 - u) / (rate_vph / 3600.0);
    return std::max(gap, cfg_.min_spawn_headway);
  }

  // --- controller interface -------------------------------------------------

  void control_round(double t) {
    for (auto& lane : lanes_)
      for (int idx : lane) {
        Agent& ag = agents_[idx];
        if (ag.stop_idx >= corridors_[ag.corridor].stops.size()) continue;
        const StopGeom& s = corridors_[ag.corridor].stops[ag.stop_idx];
        net_->update_subscriber(s.node, ag.id, s.access - ag.front, ag.v);
      }
    coord::RoundOutcome outcome = net_->run_round(t);
    const auto& final_iter = outcome.iterations.back();
    for (const auto& nr : final_iter.nodes) {
      if (nr.fallback) ++counters_.controller_fallbacks;
      for (const auto& [vid, time] : nr.primary) {
        auto it = agent_by_id_.find(vid);
        if (it == agent_by_id_.end()) continue;
        Agent& ag = agents_[it->second];
        const auto& stops = corridors_[ag.corridor].stops;
        if (ag.stop_idx < stops.size() && stops[ag.stop_idx].node == nr.node) {
          ag.assigned = time;
          ag.events[ag.stop_idx].final_assigned = time;
        }
      }
      if (cfg_.testbed == Testbed::D) {
        for (const auto& [vid, time] : nr.phantom) {
          auto it = agent_by_id_.find(vid);
          if (it == agent_by_id_.end()) continue;
          Agent& ag = agents_[it->second];
          const auto& stops = corridors_[ag.corridor].stops;
          if (ag.stop_idx + 1 < stops.size() && stops[ag.stop_idx + 1].node == nr.node)
            ag.next_assigned = time;
        }
      }
      counters_.lp_solves += nr.schedule.stats.lp_solves;
      counters_.bb_nodes += nr.schedule.stats.nodes;
      counters_.simplex_pivots += nr.schedule.stats.pivots;
    }
  }

  void subscribe_agent(Agent& ag, double t) {
    if (!net_) return;
    const auto& stops = corridors_[ag.corridor].stops;
    if (ag.stop_idx >= stops.size()) return;
    const StopGeom& s = stops[ag.stop_idx];
    sched::Vehicle v;
    v.id = ag.id;
    v.intersection = s.node;
    v.movement = corridors_[ag.corridor].movement;
    v.phase = phase_of(v.movement);
    v.distance_to_access = std::max(0.0, s.access - ag.front);
    v.velocity = ag.v;
    v.length = ag.length;
    if (ag.assigned) v.t_access_assigned = ag.assigned;
    net_->subscribe(v, t);
  }

  // --- per-step phases -------------------------------------------------------

  void inject(double t) {
    for (std::size_t c = 0; c < corridors_.size(); ++c) {
      while (next_arrival_[c] <= t) {
        double spawn_v = cfg_.v_avg();
        if (!lanes_[c].empty()) {
          const Agent& tail = agents_[lanes_[c].back()];
          double gap = tail.front - tail.length;  // spawn front at 0
          double vs = safe_speed(gap, tail.v, cfg_.a_max(), cfg_.dt, cfg_.min_gap);
          if (gap < cfg_.min_gap + 1.0 || vs < 3.0) break;  // deferred, retry next step
          spawn_v = std::min(spawn_v, vs);
        }
        Agent ag;
        ag.id = next_vehicle_id_++;
        ag.corridor = static_cast<int>(c);
        ag.front = 0.0;
        ag.v = spawn_v;
        ag.length = cfg_.vehicle_length;
        ag.spawn_time = t;
        ag.events.resize(corridors_[c].stops.size());
        agents_.push_back(ag);
        int idx = static_cast<int>(agents_.size() - 1);
        lanes_[c].push_back(idx);
        agent_by_id_[ag.id] = idx;
        ++injected_;
        subscribe_agent(agents_[idx], t);
        next_arrival_[c] += draw_gap(rngs_[c], corridors_[c].rate_vph);
      }
    }
  }

  int queue_ahead(std::size_t node, Movement m) const {
    return queue_count_[node].per_movement[static_cast<int>(m)];
  }

  std::vector<double> compute_commands(double t) {
    std::vector<double> out(agents_.size(), 0.0);
    for (std::size_t c = 0; c < corridors_.size(); ++c) {
      const CorridorGeom& geom = corridors_[c];
      const Agent* leader = nullptr;
      for (int idx : lanes_[c]) {
        Agent& ag = agents_[idx];
        out[idx] = command_for(ag, geom, leader, t);
        leader = &ag;
      }
    }
    return out;
  }

  double command_for(Agent& ag, const CorridorGeom& geom, const Agent* leader, double t) {
    const double a_max = cfg_.a_max();
    const double v_max = cfg_.v_max();
    double cruise = cfg_.v_avg();
    double accel_cmd;
    double allow = std::numeric_limits<double>::infinity();

    auto wall_at = [&](double pos, double standoff) {
      double v_ok = safe_speed(pos - ag.front, 0.0, a_max, cfg_.dt, standoff);
      allow = std::min(allow, v_ok);
    };

    if (leader) {
      double gap = leader->front - leader->length - ag.front;
      allow = std::min(allow, safe_speed(gap, leader->v, a_max, cfg_.dt, cfg_.min_gap));
    }

    const StopGeom* s =
        ag.stop_idx < geom.stops.size() ? &geom.stops[ag.stop_idx] : nullptr;
    Phase phase = phase_of(geom.movement);

    if (!s) {
      accel_cmd = cfg_.tracking_gain * (cruise - ag.v);
      return std::min(accel_cmd, (allow - ag.v) / cfg_.dt);
    }

    double dist_bar = s->bar - ag.front;

    // Target-speed selection per testbed.
    if (net_) {
      if (ag.front < s->access) {
        if (ag.assigned) {
          bool unreachable = false;
          accel_cmd = tracking_accel(s->access - ag.front, ag.v, *ag.assigned, t,
                                     cfg_.tracking_gain, v_max, a_max, &unreachable);
          if (unreachable) ++counters_.unreachable_assignments;
          if (t < *ag.assigned - 1e-9) wall_at(s->access, kAccessStandoff);
        } else {
          accel_cmd = cfg_.tracking_gain * (cruise - ag.v);
          wall_at(s->access, kAccessStandoff);
        }
      } else {
        accel_cmd = cfg_.tracking_gain * (v_max - ag.v);
      }
    } else {
      double target = cruise;
      if (ag.front < s->bar && cfg_.testbed == Testbed::B &&
          dist_bar <= cfg_.advisory_range) {
        int q = dist_bar <= cfg_.queue_info_range ? queue_ahead(s->node_idx, geom.movement)
                                                  : 0;
        target = advisory_speed(dist_bar, t, plans_[s->node_idx], phase, cruise, v_max, q,
                                cfg_.discharge_headway);
      } else if (ag.front >= s->bar) {
        target = v_max;  // clear the box briskly
      }
      accel_cmd = cfg_.tracking_gain * (target - ag.v);
    }

    // Commit-and-claim gate. Until a vehicle commits, a wall keeps it able
    // to stop at the bar; committing requires a free slot beyond the box,
    // no conflicting claim, and control permission. A committed vehicle can
    // no longer be stranded: leader rears only ever move forward.
    if (ag.front < s->bar && !ag.committed) {
      wall_at(s->bar, kBarStandoff);

      double brake_dist = ag.v * ag.v / (2.0 * a_max);
      bool range_ok = dist_bar <= brake_dist + 2.0 * ag.v * cfg_.dt + 3.0;
      double leader_rear = leader ? leader->front - leader->length
                                  : std::numeric_limits<double>::infinity();
      bool slot_ok =
          leader_rear >= s->box_exit + ag.length + cfg_.min_gap + 2.0;
      auto& claims = claims_[s->node_idx];
      bool conflict_free = (phase == Phase::X ? claims.o : claims.x) == 0;

      // Conservative time to reach the bar: half throttle from the speed the
      // car-following envelope can sustain along the way.
      double slot_floor =
          leader ? std::min(ag.v, std::sqrt(std::max(
                                      0.0, 2.0 * a_max * (leader_rear - s->bar - cfg_.min_gap))))
                 : ag.v;
      double v0 = std::max(0.3, slot_floor);
      double t_bar = (-v0 + std::sqrt(v0 * v0 + a_max * std::max(dist_bar, 0.0))) /
                     (0.5 * a_max);

      bool control_ok;
      if (net_) {
        control_ok = ag.assigned && t >= *ag.assigned - 0.5;
      } else {
        const SignalPlan& plan = plans_[s->node_idx];
        SignalState st = plan.state(phase, t);
        bool know = dist_bar <= (cfg_.testbed == Testbed::B ? cfg_.advisory_range
                                                            : cfg_.camera_range);
        if (!know) {
          control_ok = false;
        } else if (cfg_.testbed == Testbed::B) {
          control_ok = st != SignalState::Red &&
                       plan.time_until_red(phase, t) >= t_bar + 0.5;
        } else {
          control_ok = st == SignalState::Green && t_bar <= cfg_.amber * 0.85;
        }
      }

      if (range_ok && slot_ok && conflict_free && control_ok) {
        ag.committed = true;
        (phase == Phase::X ? claims.x : claims.o) += 1;
      } else if (net_ && !ag.stall_counted && control_ok && dist_bar <= 3.0 &&
                 ag.v < 0.2) {
        // MILP timing slack exhausted: the vehicle is standing at the bar
        // while the gate stays closed.
        ++counters_.hard_gate_stops;
        ag.stall_counted = true;
      }
    }

    return std::min(accel_cmd, (allow - ag.v) / cfg_.dt);
  }

  void integrate(double t, const std::vector<double>& commands, double dt) {
    for (std::size_t c = 0; c < corridors_.size(); ++c) {
      const CorridorGeom& geom = corridors_[c];
      for (int idx : lanes_[c]) {
        Agent& ag = agents_[idx];
        StepResult sr = step_vehicle(ag.v, commands[idx], dt, cfg_.v_max(), cfg_.a_max());
        double front_old = ag.front;
        ag.a = (sr.velocity - ag.v) / dt;
        ag.v = sr.velocity;
        ag.front = front_old + sr.delta_pos;

        if (ag.stop_idx < geom.stops.size()) {
          const StopGeom& s = geom.stops[ag.stop_idx];
          auto cross_time = [&](double pos) {
            double denom = std::max(sr.delta_pos, 1e-9);
            return t + dt * std::clamp((pos - front_old) / denom, 0.0, 1.0);
          };
          if (front_old < s.access && ag.front >= s.access)
            ag.events[ag.stop_idx].realized_access = cross_time(s.access);
          if (front_old < s.bar && ag.front >= s.bar) {
            Phase phase = phase_of(geom.movement);
            if (!ag.committed)
              throw InvariantViolation("vehicle " + std::to_string(ag.id) +
                                       " crossed " + s.node.label() +
                                       " stop bar without a box claim");
            if (!net_) {
              const SignalPlan& plan = plans_[s.node_idx];
              if (plan.state(phase, t) == SignalState::Red)
                throw InvariantViolation("vehicle " + std::to_string(ag.id) + " crossed " +
                                         s.node.label() + " stop bar on red");
            }
            auto& box = box_count_[s.node_idx];
            (phase == Phase::X ? box.x : box.o) += 1;
            ag.events[ag.stop_idx].t_enter = cross_time(s.bar);
          }
          double clear_pos = s.box_exit + ag.length;
          if (ag.events[ag.stop_idx].t_enter >= 0.0 && front_old < clear_pos &&
              ag.front >= clear_pos) {
            Phase phase = phase_of(geom.movement);
            auto& box = box_count_[s.node_idx];
            (phase == Phase::X ? box.x : box.o) -= 1;
            auto& claims = claims_[s.node_idx];
            (phase == Phase::X ? claims.x : claims.o) -= 1;
            ag.committed = false;
            ag.stall_counted = false;
            ag.events[ag.stop_idx].t_exit = cross_time(clear_pos);
            ++traversals_;
            if (net_) net_->unsubscribe(s.node, ag.id, t);
            ag.assigned.reset();
            ++ag.stop_idx;
            if (ag.stop_idx < geom.stops.size()) {
              if (cfg_.testbed == Testbed::D && ag.next_assigned) {
                ag.assigned = ag.next_assigned;
                ag.events[ag.stop_idx].final_assigned = *ag.next_assigned;
              }
              ag.next_assigned.reset();
              subscribe_agent(ag, t);
            } else {
              ag.completed_at = ag.events[ag.stop_idx - 1].t_exit;
              ++completed_;
            }
          }
        }

        if (!ag.metrics_frozen) {
          ag.stop_counter.sample(ag.v, dt);
          ag.fuel_g += metrics::fuel_rate(ag.v, ag.a, cfg_.fuel) * dt;
          ag.distance += sr.delta_pos;
          if (ag.completed_at >= 0.0) ag.metrics_frozen = true;
        }
      }
    }
  }

  void check_invariants(double t) {
    for (std::size_t c = 0; c < corridors_.size(); ++c) {
      const Agent* ahead = nullptr;
      for (int idx : lanes_[c]) {
        const Agent& ag = agents_[idx];
        if (ahead) {
          double gap = ahead->front - ahead->length - ag.front;
          if (gap <= 0.0)
            throw InvariantViolation(
                "negative bumper gap on corridor " + std::to_string(c) + " at t=" +
                util::format_double(t) + " between " + std::to_string(ahead->id) + " and " +
                std::to_string(ag.id));
        }
        ahead = &ag;
      }
    }
    for (std::size_t n = 0; n < box_count_.size(); ++n) {
      if (box_count_[n].x > 0 && box_count_[n].o > 0)
        throw InvariantViolation("conflicting phases occupy box of I" +
                                 std::to_string(topology_.intersections()[n].id.value) +
                                 " at t=" + util::format_double(t));
    }
  }

  void update_queue_counts() {
    for (auto& q : queue_count_) q = {};
    for (std::size_t c = 0; c < corridors_.size(); ++c) {
      const CorridorGeom& geom = corridors_[c];
      for (int idx : lanes_[c]) {
        const Agent& ag = agents_[idx];
        if (ag.stop_idx >= geom.stops.size()) continue;
        const StopGeom& s = geom.stops[ag.stop_idx];
        double du = s.bar - ag.front;
        if (du >= 0.0 && du <= 150.0 && ag.v < 2.0)
          queue_count_[s.node_idx].per_movement[static_cast<int>(geom.movement)] += 1;
      }
    }
  }

  void sample_queues() {
    for (std::size_t n = 0; n < queue_count_.size(); ++n) {
      const auto& q = queue_count_[n].per_movement;
      float qx = static_cast<float>(q[static_cast<int>(Movement::East)] +
                                    q[static_cast<int>(Movement::West)]);
      float qo = static_cast<float>(q[static_cast<int>(Movement::North)] +
                                    q[static_cast<int>(Movement::South)]);
      queue_series_x_[n].push_back(qx);
      queue_series_o_[n].push_back(qo);
    }
  }

  void record(double t, double dt) {
    (void)dt;
    for (std::size_t c = 0; c < corridors_.size(); ++c) {
      const CorridorGeom& geom = corridors_[c];
      for (int idx : lanes_[c]) {
        const Agent& ag = agents_[idx];
        std::int32_t link;
        char context[24];
        context[0] = '-';
        context[1] = 0;
        if (ag.stop_idx < geom.stops.size()) {
          const StopGeom& s = geom.stops[ag.stop_idx];
          link = ag.front < s.bar ? s.approach_link : -s.node.value;
          if (net_) {
            if (ag.assigned) std::snprintf(context, sizeof(context), "%.2f", *ag.assigned);
          } else {
            SignalState st = plans_[s.node_idx].state(phase_of(geom.movement), t);
            context[0] = st == SignalState::Green ? 'G' : (st == SignalState::Amber ? 'A' : 'R');
            context[1] = 0;
          }
        } else {
          link = geom.exit_link;
        }
        hash_.update(static_cast<double>(ag.id));
        hash_.update(t);
        hash_.update(ag.front);
        hash_.update(ag.v);
        hash_.update(ag.a);
        hash_.update(static_cast<double>(link));
        if (trajectory_csv_) {
          *trajectory_csv_ << ag.id << ',' << util::format_double(t) << ','
                           << util::format_double(ag.front) << ','
                           << util::format_double(ag.v) << ',' << util::format_double(ag.a)
                           << ',' << link << ',' << context << '\n';
        }
      }
    }
  }

  void sweep_removals() {
    for (std::size_t c = 0; c < corridors_.size(); ++c) {
      while (!lanes_[c].empty()) {
        Agent& ag = agents_[lanes_[c].front()];
        if (ag.front <= corridors_[c].remove_pos) break;
        ag.removed = true;
        agent_by_id_.erase(ag.id);
        lanes_[c].pop_front();
      }
    }
  }

  SimResult finalize() {
    SimResult out;
    metrics::MetricsReport& r = out.report;
    r.testbed = to_string(cfg_.testbed);
    r.seed = cfg_.seed;
    r.intersection_traversals = traversals_;
    r.injected_vehicles = injected_;
    r.completed_vehicles = completed_;
    r.in_network_at_end = injected_ - completed_;

    std::vector<double> travel_times, trip_velocities, mpgs;
    for (const Agent& ag : agents_) {
      r.total_stops += ag.stop_counter.stops();
      r.total_stop_time += ag.stop_counter.stopped_time();
      if (ag.completed_at >= 0.0) {
        double duration = ag.completed_at - ag.spawn_time;
        travel_times.push_back(duration);
        if (duration > 0.0 && ag.distance > 0.0)
          trip_velocities.push_back(ag.distance / duration);
        if (ag.fuel_g > 0.0)
          mpgs.push_back((ag.distance / 1609.344) / (ag.fuel_g / cfg_.fuel.grams_per_gallon()));
      }
    }
    auto mean = [](const std::vector<double>& v) {
      if (v.empty()) return 0.0;
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    r.avg_stop_time_per_vehicle =
        injected_ > 0 ? r.total_stop_time / static_cast<double>(injected_) : 0.0;
    r.avg_stop_time_per_stop =
        r.total_stops > 0 ? r.total_stop_time / static_cast<double>(r.total_stops) : 0.0;
    r.avg_travel_time = mean(travel_times);
    r.avg_mpg = mean(mpgs);
    r.mean_trip_velocity = mean(trip_velocities);
    if (trip_velocities.size() >= 2) {
      auto [mu, sigma] = metrics::fit_lognormal(trip_velocities);
      r.lognormal_mu = mu;
      r.lognormal_sigma = sigma;
    }
    if (!trip_velocities.empty())
      r.velocity_histogram = metrics::histogram(trip_velocities, 0.0, cfg_.v_max(), 40);

    for (std::size_t n = 0; n < queue_series_x_.size(); ++n) {
      int node = topology_.intersections()[n].id.value;
      metrics::QueueSeries qx;
      qx.intersection = node;
      qx.phase = 'X';
      qx.samples = queue_series_x_[n];
      metrics::QueueSeries qo;
      qo.intersection = node;
      qo.phase = 'O';
      qo.samples = queue_series_o_[n];
      double acc = 0.0;
      for (std::size_t i = 0; i < qx.samples.size(); ++i)
        acc += 0.5 * (qx.samples[i] + qo.samples[i]);
      r.mean_queue_per_intersection[node] =
          qx.samples.empty() ? 0.0 : acc / static_cast<double>(qx.samples.size());
      r.queues.push_back(std::move(qx));
      r.queues.push_back(std::move(qo));
    }
    r.trajectory_hash = hash_.digest();

    if (events_csv_) {
      *events_csv_ << "vehicle,intersection,t_access_assigned,t_access_realized,t_enter,t_exit\n";
      for (const Agent& ag : agents_) {
        const auto& stops = corridors_[ag.corridor].stops;
        for (std::size_t k = 0; k < ag.events.size(); ++k) {
          const auto& ev = ag.events[k];
          if (ev.realized_access < 0.0 && ev.t_enter < 0.0) continue;
          *events_csv_ << ag.id << ',' << stops[k].node.value << ','
                       << (std::isnan(ev.final_assigned) ? std::string("-")
                                                         : util::format_double(ev.final_assigned))
                       << ',' << util::format_double(ev.realized_access) << ','
                       << util::format_double(ev.t_enter) << ','
                       << util::format_double(ev.t_exit) << '\n';
        }
      }
    }

    out.counters = counters_;
    if (net_ && cfg_.record_transcript) out.transcript_jsonl = net_->transcript_jsonl();
    return out;
  }

  struct BoxCount {
    int x = 0;
    int o = 0;
  };
  struct QueueCount {
    int per_movement[4] = {0, 0, 0, 0};
  };

  SimConfig cfg_;
  coord::GridTopology topology_;
  std::ostream* trajectory_csv_;
  std::ostream* events_csv_;
  sched::SchedulerParams params_;
  std::optional<coord::ControllerNetwork> net_;
  std::vector<SignalPlan> plans_;

  std::vector<CorridorGeom> corridors_;
  std::vector<std::deque<int>> lanes_;
  std::vector<Xoshiro> rngs_;
  std::vector<double> next_arrival_;
  std::vector<Agent> agents_;
  std::map<VehicleId, int> agent_by_id_;
  std::map<std::int32_t, std::size_t> node_index_;
  std::vector<BoxCount> box_count_;
  std::vector<BoxCount> claims_;
  std::vector<QueueCount> queue_count_;
  std::vector<std::vector<float>> queue_series_x_, queue_series_o_;

  util::Fnv1a hash_;
  SimCounters counters_;
  std::int64_t traversals_ = 0;
  std::int64_t injected_ = 0;
  std::int64_t completed_ = 0;
  VehicleId next_vehicle_id_ = 1;
};

}  // namespace

SimResult run_simulation(const SimConfig& config, std::ostream* trajectory_csv,
                         std::ostream* events_csv) {
  config.validate();
  World world(config, trajectory_csv, events_csv);
  return world.run();
}

}  // namespace aim::sim
