#ifndef AIM_METRICS_METRICS_HPP
#define AIM_METRICS_METRICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace aim::metrics {

/// Tractive-power fuel proxy. Defaults describe a midsize sedan with a
/// roughly one-third efficient gasoline engine.
struct FuelModelParams {
  double mass_kg = 1500.0;
  double drag_area_m2 = 0.68;  // Cd * frontal area
  double air_density = 1.2;    // kg/m^3
  double rolling_resistance = 0.009;
  double idle_rate_g_per_s = 0.15;
  double fuel_per_energy_g_per_j = 7.0e-5;
  double fuel_density_g_per_l = 737.0;
  double liters_per_gallon = 3.785411784;
  double gravity = 9.81;

  double grams_per_gallon() const { return fuel_density_g_per_l * liters_per_gallon; }
};

/// Fuel mass flow at one operating point; no recuperation under braking.
double fuel_rate(double velocity, double acceleration, const FuelModelParams& params);

/// Stop events with hysteresis: a stop begins below 0.5 m/s and ends above
/// 1.0 m/s; stopped time counts every sample strictly below 0.5 m/s.
class StopCounter {
 public:
  void sample(double velocity, double dt) {
    if (velocity < kEnter) {
      if (!in_stop_) {
        in_stop_ = true;
        ++stops_;
      }
      stopped_time_ += dt;
    } else if (velocity > kExit) {
      in_stop_ = false;
    }
  }
  int stops() const { return stops_; }
  double stopped_time() const { return stopped_time_; }

  static constexpr double kEnter = 0.5;
  static constexpr double kExit = 1.0;

 private:
  bool in_stop_ = false;
  int stops_ = 0;
  double stopped_time_ = 0.0;
};

struct StopStats {
  int stops = 0;
  double stopped_time = 0.0;
};

/// Batch form over a uniformly sampled velocity series.
StopStats count_stops(const std::vector<double>& velocity_series, double dt);

/// Maximum-likelihood lognormal fit: mean and population standard deviation
/// of the log samples. Throws on nonpositive samples or fewer than two.
std::pair<double, double> fit_lognormal(const std::vector<double>& samples);

/// One approaching vehicle as seen from a stop bar.
struct ApproachVehicle {
  double distance_upstream = 0.0;  // m ahead of the stop bar, >= 0
  double velocity = 0.0;
};

/// Queue membership: slower than 2 m/s within 150 m of the stop bar.
int queue_length(const std::vector<ApproachVehicle>& approach, double window_m = 150.0,
                 double v_threshold = 2.0);

struct HistogramBin {
  double lo = 0.0, hi = 0.0;
  int count = 0;
};

std::vector<HistogramBin> histogram(const std::vector<double>& samples, double lo, double hi,
                                    int bins);

struct QueueSeries {
  int intersection = 0;
  char phase = 'X';
  std::vector<float> samples;  // one per second
};

struct MetricsReport {
  std::int64_t intersection_traversals = 0;
  std::int64_t injected_vehicles = 0;
  std::int64_t completed_vehicles = 0;
  std::int64_t in_network_at_end = 0;
  std::int64_t total_stops = 0;
  double total_stop_time = 0.0;
  double avg_stop_time_per_vehicle = 0.0;  // over all injected vehicles
  double avg_stop_time_per_stop = 0.0;     // the conclusions' alternative reading
  double avg_travel_time = 0.0;            // completed vehicles
  double avg_mpg = 0.0;                    // completed vehicles
  double mean_trip_velocity = 0.0;         // completed vehicles
  double lognormal_mu = 0.0;
  double lognormal_sigma = 0.0;
  std::vector<HistogramBin> velocity_histogram;
  std::vector<QueueSeries> queues;
  std::map<int, double> mean_queue_per_intersection;  // time mean of phase average
  std::uint64_t trajectory_hash = 0;
  std::string scenario_fingerprint;
  std::string testbed;
  std::uint64_t seed = 0;

  std::string to_json() const;
  static MetricsReport from_json(const std::string& text);
  std::string summary_csv() const;  // measures-of-effectiveness table
  std::string queues_csv() const;
  std::string histogram_csv() const;
};

}  // namespace aim::metrics

#endif  // AIM_METRICS_METRICS_HPP
