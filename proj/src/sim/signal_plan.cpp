#include "aim/sim/signal_plan.hpp"

#include <algorithm>
#include <cmath>

namespace aim::sim {

namespace {
double wrap(double t, double cycle) {
  double tau = std::fmod(t, cycle);
  return tau < 0.0 ? tau + cycle : tau;
}
}  // namespace

SignalState SignalPlan::state(Phase phase, double t) const {
  double tau = wrap(t - offset, cycle);
  double start = phase == Phase::X ? 0.0 : green_x + amber + all_red;
  double green = phase == Phase::X ? green_x : green_o;
  double rel = wrap(tau - start, cycle);
  if (rel < green) return SignalState::Green;
  if (rel < green + amber) return SignalState::Amber;
  return SignalState::Red;
}

double SignalPlan::time_until_red(Phase phase, double t) const {
  double tau = wrap(t - offset, cycle);
  double start = phase == Phase::X ? 0.0 : green_x + amber + all_red;
  double green = phase == Phase::X ? green_x : green_o;
  double rel = wrap(tau - start, cycle);
  if (rel < green + amber) return green + amber - rel;
  return 0.0;
}

std::pair<double, double> SignalPlan::next_green(Phase phase, double t) const {
  double tau = wrap(t - offset, cycle);
  double start = phase == Phase::X ? 0.0 : green_x + amber + all_red;
  double green = phase == Phase::X ? green_x : green_o;
  double rel = wrap(tau - start, cycle);
  if (rel < green) return {t - rel, t - rel + green};
  double wait = cycle - rel;
  return {t + wait, t + wait + green};
}

SignalPlan webster_plan(double flow_east, double flow_west, double flow_north,
                        double flow_south, double saturation_flow_vphpl, double amber,
                        double all_red) {
  SignalPlan plan;
  plan.amber = amber;
  plan.all_red = all_red;
  double y_x = std::max(flow_east, flow_west) / saturation_flow_vphpl;
  double y_o = std::max(flow_north, flow_south) / saturation_flow_vphpl;
  double total_y = std::max(1e-6, y_x + y_o);
  double lost = 2.0 * plan.lost_per_phase();
  double cycle;
  if (total_y >= 0.95) {
    cycle = 120.0;  // oversaturated; pin to the ceiling
  } else {
    cycle = std::clamp((1.5 * lost + 5.0) / (1.0 - total_y), 30.0, 120.0);
  }
  double usable = cycle - lost;
  double gx = usable * (y_x / total_y);
  // Keep both greens long enough to discharge a couple of vehicles.
  const double kMinGreen = 7.0;
  gx = std::clamp(gx, kMinGreen, usable - kMinGreen);
  plan.cycle = cycle;
  plan.green_x = gx;
  plan.green_o = usable - gx;
  return plan;
}

}  // namespace aim::sim
