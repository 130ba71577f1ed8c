#ifndef AIM_CLI_CASE_STUDY_HPP
#define AIM_CLI_CASE_STUDY_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "aim/coordination/controller.hpp"

namespace aim::cli {

/// The two-intersection MILP exchange: nine vehicles subscribe to each
/// intersection, the controllers solve, swap handoffs, and solve again.
struct CaseStudyConfig {
  sched::SchedulerParams params;  // bundled scenario uses w1 = 8, w2 = 1
  double spacing = 500.0;         // m between the two intersections
  double approach_length = 2000.0;
  int iterations = 2;
  coord::CoordinationMode mode = coord::CoordinationMode::Coordinated;
};

struct CaseStudyResult {
  struct Row {
    VehicleId vehicle = 0;
    // Columns: I_1 iteration 1, I_2 iteration 1, I_1 iteration 2, I_2 iteration 2.
    std::array<std::optional<double>, 4> access;
  };
  std::vector<Row> rows;
  coord::RoundOutcome outcome;
  std::vector<sched::Violation> violations;  // over every node solve, all iterations
  std::string transcript_jsonl;
  sched::SchedulerParams params;
};

/// The eighteen-vehicle subscriber set; ids 1..9 sit at I_1, 10..18 at I_2
/// with mirrored states.
std::vector<sched::Vehicle> case_study_vehicles(const sched::SchedulerParams& params);

CaseStudyResult run_case_study(const CaseStudyConfig& config);

/// Access-time table in the shape of the paper's results table.
std::string case_study_table_csv(const CaseStudyResult& result);

}  // namespace aim::cli

#endif  // AIM_CLI_CASE_STUDY_HPP
