#include <cstdio>
#include <random>
#include "aim/scheduler/scheduler.hpp"
#include "aim/milp/solver.hpp"
using namespace aim; using namespace aim::sched;
int main() {
  for (int n : {14, 18, 22}) {
    SchedulerParams p;
    std::mt19937_64 rng(42);
    std::vector<Vehicle> vs;
    double d = 20;
    for (int i = 0; i < n; ++i) {
      Vehicle v; v.id = i+1; v.intersection = IntersectionId{5};
      v.movement = static_cast<Movement>(rng() % 4);
      v.phase = phase_of(v.movement);
      d += 5 + (rng() % 40);
      v.distance_to_access = d;
      v.velocity = p.v_avg * (0.7 + 0.3 * ((rng() >> 11) * 0x1.0p-53));
      vs.push_back(v);
    }
    for (bool cuts : {false, true}) {
      SchedulerParams q = p; q.pair_deviation_rows = cuts;
      ScheduleModel sm = build_schedule_model(vs, q, 0.0);
      milp::Solution root = milp::solve_lp(sm.model);
      ScheduleResult r = solve_schedule(vs, q, 0.0);
      std::printf("n=%2d cuts=%d root=%.4f opt=%.4f gap=%.4f nodes=%llu\n",
        n, (int)cuts, root.objective, r.objective, r.objective - root.objective,
        (unsigned long long)r.stats.nodes);
    }
  }
}
