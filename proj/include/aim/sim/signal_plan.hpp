#ifndef AIM_SIM_SIGNAL_PLAN_HPP
#define AIM_SIM_SIGNAL_PLAN_HPP

#include <array>
#include <map>

#include "aim/core/types.hpp"

namespace aim::sim {

enum class SignalState { Green, Amber, Red };

/// Fixed-time two-phase plan. One cycle is
///   green X | amber | all-red | green O | amber | all-red
/// and crossing during amber is legal.
struct SignalPlan {
  double cycle = 60.0;
  double green_x = 26.0;
  double green_o = 26.0;
  double amber = 3.0;
  double all_red = 1.0;
  double offset = 0.0;

  double lost_per_phase() const { return amber + all_red; }

  SignalState state(Phase phase, double t) const;
  /// Seconds from t until the end of the current/upcoming legal crossing
  /// window (green + amber) for `phase`; 0 when currently red.
  double time_until_red(Phase phase, double t) const;
  /// Next green interval [start, end) at or after t, absolute times.
  std::pair<double, double> next_green(Phase phase, double t) const;
};

/// Webster-style plan: cycle from the critical flow ratios at 1800 vphpl
/// saturation flow, splits proportional to the critical ratios.
SignalPlan webster_plan(double flow_east, double flow_west, double flow_north,
                        double flow_south, double saturation_flow_vphpl, double amber,
                        double all_red);

}  // namespace aim::sim

#endif  // AIM_SIM_SIGNAL_PLAN_HPP
