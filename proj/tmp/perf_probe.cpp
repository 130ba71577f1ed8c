#include <chrono>
#include <cstdio>
#include "aim/sim/simulation.hpp"
using namespace aim; using namespace aim::sim;
int main(int argc, char** argv) {
  SimConfig c;
  c.testbed = *testbed_from_string(argv[1]);
  c.seed = argc > 3 ? atoll(argv[3]) : 11;
  c.duration = atof(argv[2]);
  c.injection_rates_vph = {550, 300, 600, 950, 550, 200, 750, 900, 400, 450, 750, 550};
  auto t0 = std::chrono::steady_clock::now();
  SimResult r = run_simulation(c);
  double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("testbed %s dur %.0f seed %llu: wall %.1fs inj %lld compl %lld trav %lld stops %lld tt %.1f mpg %.1f vbar %.2f sigma %.3f q5 %.2f | lp %llu nodes %llu pivots %llu stalls %lld unreach %lld fallb %lld\n",
    argv[1], c.duration, (unsigned long long)c.seed, el, (long long)r.report.injected_vehicles, (long long)r.report.completed_vehicles,
    (long long)r.report.intersection_traversals, (long long)r.report.total_stops,
    r.report.avg_travel_time, r.report.avg_mpg, r.report.mean_trip_velocity, r.report.lognormal_sigma,
    r.report.mean_queue_per_intersection.count(5) ? r.report.mean_queue_per_intersection.at(5) : -1.0,
    (unsigned long long)r.counters.lp_solves, (unsigned long long)r.counters.bb_nodes,
    (unsigned long long)r.counters.simplex_pivots,
    (long long)r.counters.hard_gate_stops, (long long)r.counters.unreachable_assignments,
    (long long)r.counters.controller_fallbacks);
  return 0;
}
