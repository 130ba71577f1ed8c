#include "aim/cli/case_study.hpp"

#include <stdexcept>

#include "aim/util/text.hpp"

namespace aim::cli {

std::vector<sched::Vehicle> case_study_vehicles(const sched::SchedulerParams& params) {
  const double dist[9] = {690, 750, 780, 900, 990, 1080, 1170, 1230, 1290};
  // Five vehicles per intersection travel on phase X, four on phase O; the
  // phase-O southbound vehicle at I_1 and the northbound ones at I_2 continue
  // to the neighboring intersection.
  const Movement mov[9] = {Movement::North, Movement::East, Movement::South,
                           Movement::West,  Movement::East, Movement::East,
                           Movement::North, Movement::West, Movement::North};
  std::vector<sched::Vehicle> out;
  for (int node = 0; node < 2; ++node) {
    for (int i = 0; i < 9; ++i) {
      sched::Vehicle v;
      v.id = node * 9 + i + 1;
      v.intersection = IntersectionId{node + 1};
      v.movement = mov[i];
      v.phase = phase_of(v.movement);
      v.distance_to_access = dist[i];
      v.velocity = params.v_avg;
      out.push_back(v);
    }
  }
  return out;
}

CaseStudyResult run_case_study(const CaseStudyConfig& config) {
  sched::IntersectionGeometry geometry;
  geometry.d_access = sched::default_access_distance(config.params.v_avg, config.params.a_max);
  coord::GridTopology topo = coord::GridTopology::two_intersection_column(
      config.spacing, config.approach_length, geometry);

  coord::ControllerNetwork net(topo, config.params, config.mode, config.iterations);
  for (const auto& v : case_study_vehicles(config.params)) net.subscribe(v, 0.0);

  CaseStudyResult result;
  result.params = config.params;
  result.outcome = net.run_round(0.0);

  std::map<VehicleId, CaseStudyResult::Row> rows;
  for (std::size_t it = 0; it < result.outcome.iterations.size() && it < 2; ++it) {
    for (const auto& nr : result.outcome.iterations[it].nodes) {
      std::size_t col = it * 2 + (nr.node.value == 2 ? 1 : 0);
      for (const auto& [vid, t] : nr.primary) {
        rows[vid].vehicle = vid;
        rows[vid].access[col] = t;
      }
      for (const auto& [vid, t] : nr.phantom) {
        rows[vid].vehicle = vid;
        rows[vid].access[col] = t;
      }
      if (!nr.solved_list.empty()) {
        auto v = sched::validate_schedule(nr.solved_list, nr.schedule.assignments,
                                          config.params, 0.0);
        result.violations.insert(result.violations.end(), v.begin(), v.end());
      }
    }
  }
  for (auto& [vid, row] : rows) result.rows.push_back(row);
  result.transcript_jsonl = net.transcript_jsonl();
  return result;
}

std::string case_study_table_csv(const CaseStudyResult& result) {
  std::string out = "vehicle,i1_iter1,i2_iter1,i1_iter2,i2_iter2\n";
  for (const auto& row : result.rows) {
    out += std::to_string(row.vehicle);
    for (const auto& cell : row.access) {
      out += ',';
      if (cell) {
        char buf[32];
        int len = std::snprintf(buf, sizeof(buf), "%.2f", *cell);
        out.append(buf, len);
      } else {
        out += '-';
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace aim::cli
