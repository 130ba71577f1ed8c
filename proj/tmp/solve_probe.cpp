#include <chrono>
#include <cstdio>
#include <random>
#include "aim/scheduler/scheduler.hpp"
using namespace aim; using namespace aim::sched;
int main() {
  for (int n : {10, 14, 18, 22, 26, 30}) {
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
    ScheduleModel sm = build_schedule_model(vs, p, 0.0);
    auto t0 = std::chrono::steady_clock::now();
    ScheduleResult r = solve_schedule(vs, p, 0.0);
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("n=%2d binaries=%3zu rows=%3zu: %s obj=%.2f  %.1f ms  nodes=%llu lp=%llu pivots=%llu\n",
      n, sm.model.num_binaries(), sm.model.num_constraints(), milp::to_string(r.status),
      r.objective, el*1e3, (unsigned long long)r.stats.nodes,
      (unsigned long long)r.stats.lp_solves, (unsigned long long)r.stats.pivots);
  }
}
