#include "aim/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "aim/util/text.hpp"

namespace aim::metrics {

double fuel_rate(double velocity, double acceleration, const FuelModelParams& params) {
  double drag = 0.5 * params.air_density * params.drag_area_m2 * velocity * velocity;
  double rolling = params.rolling_resistance * params.mass_kg * params.gravity;
  double power = (params.mass_kg * acceleration + drag + rolling) * velocity;
  return params.idle_rate_g_per_s + params.fuel_per_energy_g_per_j * std::max(power, 0.0);
}

StopStats count_stops(const std::vector<double>& velocity_series, double dt) {
  StopCounter c;
  for (double v : velocity_series) c.sample(v, dt);
  return {c.stops(), c.stopped_time()};
}

std::pair<double, double> fit_lognormal(const std::vector<double>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("fit_lognormal: need at least 2 samples");
  double sum = 0.0;
  for (double s : samples) {
    if (!(s > 0.0)) throw std::invalid_argument("fit_lognormal: nonpositive sample");
    sum += std::log(s);
  }
  double mu = sum / static_cast<double>(samples.size());
  double ss = 0.0;
  for (double s : samples) {
    double d = std::log(s) - mu;
    ss += d * d;
  }
  double sigma = std::sqrt(ss / static_cast<double>(samples.size()));
  return {mu, sigma};
}

int queue_length(const std::vector<ApproachVehicle>& approach, double window_m,
                 double v_threshold) {
  int n = 0;
  for (const auto& v : approach)
    if (v.distance_upstream >= 0.0 && v.distance_upstream <= window_m &&
        v.velocity < v_threshold)
      ++n;
  return n;
}

std::vector<HistogramBin> histogram(const std::vector<double>& samples, double lo, double hi,
                                    int bins) {
  std::vector<HistogramBin> out(bins);
  double width = (hi - lo) / bins;
  for (int i = 0; i < bins; ++i) {
    out[i].lo = lo + i * width;
    out[i].hi = lo + (i + 1) * width;
  }
  for (double s : samples) {
    int k = static_cast<int>((s - lo) / width);
    if (k < 0) k = 0;
    if (k >= bins) k = bins - 1;
    ++out[k].count;
  }
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["testbed"] = testbed;
  j["seed"] = seed;
  j["scenario_fingerprint"] = scenario_fingerprint;
  j["intersection_traversals"] = intersection_traversals;
  j["injected_vehicles"] = injected_vehicles;
  j["completed_vehicles"] = completed_vehicles;
  j["in_network_at_end"] = in_network_at_end;
  j["total_stops"] = total_stops;
  j["total_stop_time_s"] = total_stop_time;
  j["avg_stop_time_per_vehicle_s"] = avg_stop_time_per_vehicle;
  j["avg_stop_time_per_stop_s"] = avg_stop_time_per_stop;
  j["avg_travel_time_s"] = avg_travel_time;
  j["avg_mpg"] = avg_mpg;
  j["mean_trip_velocity_mps"] = mean_trip_velocity;
  j["lognormal_mu"] = lognormal_mu;
  j["lognormal_sigma"] = lognormal_sigma;
  j["trajectory_hash"] = trajectory_hash;
  nlohmann::ordered_json hist = nlohmann::ordered_json::array();
  for (const auto& b : velocity_histogram)
    hist.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
  j["velocity_histogram"] = std::move(hist);
  nlohmann::ordered_json queues_mean = nlohmann::ordered_json::object();
  for (const auto& [node, mean] : mean_queue_per_intersection)
    queues_mean["I" + std::to_string(node)] = mean;
  j["mean_queue_per_intersection"] = std::move(queues_mean);
  return j.dump(2) + "\n";
}

MetricsReport MetricsReport::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MetricsReport r;
  r.testbed = j.at("testbed").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.scenario_fingerprint = j.at("scenario_fingerprint").get<std::string>();
  r.intersection_traversals = j.at("intersection_traversals").get<std::int64_t>();
  r.injected_vehicles = j.at("injected_vehicles").get<std::int64_t>();
  r.completed_vehicles = j.at("completed_vehicles").get<std::int64_t>();
  r.in_network_at_end = j.at("in_network_at_end").get<std::int64_t>();
  r.total_stops = j.at("total_stops").get<std::int64_t>();
  r.total_stop_time = j.at("total_stop_time_s").get<double>();
  r.avg_stop_time_per_vehicle = j.at("avg_stop_time_per_vehicle_s").get<double>();
  r.avg_stop_time_per_stop = j.at("avg_stop_time_per_stop_s").get<double>();
  r.avg_travel_time = j.at("avg_travel_time_s").get<double>();
  r.avg_mpg = j.at("avg_mpg").get<double>();
  r.mean_trip_velocity = j.at("mean_trip_velocity_mps").get<double>();
  r.lognormal_mu = j.at("lognormal_mu").get<double>();
  r.lognormal_sigma = j.at("lognormal_sigma").get<double>();
  r.trajectory_hash = j.at("trajectory_hash").get<std::uint64_t>();
  for (const auto& b : j.at("velocity_histogram"))
    r.velocity_histogram.push_back(
        {b.at("lo").get<double>(), b.at("hi").get<double>(), b.at("count").get<int>()});
  for (const auto& [key, val] : j.at("mean_queue_per_intersection").items())
    r.mean_queue_per_intersection[std::stoi(key.substr(1))] = val.get<double>();
  return r;
}

std::string MetricsReport::summary_csv() const {
  using util::format_double;
  std::string out = "measure,value\n";
  out += "intersection_traversals," + std::to_string(intersection_traversals) + "\n";
  out += "injected_vehicles," + std::to_string(injected_vehicles) + "\n";
  out += "completed_vehicles," + std::to_string(completed_vehicles) + "\n";
  out += "total_stops," + std::to_string(total_stops) + "\n";
  out += "avg_stop_time_per_vehicle_s," + format_double(avg_stop_time_per_vehicle) + "\n";
  out += "avg_stop_time_per_stop_s," + format_double(avg_stop_time_per_stop) + "\n";
  out += "avg_travel_time_s," + format_double(avg_travel_time) + "\n";
  out += "avg_mpg," + format_double(avg_mpg) + "\n";
  out += "mean_trip_velocity_mps," + format_double(mean_trip_velocity) + "\n";
  out += "lognormal_mu," + format_double(lognormal_mu) + "\n";
  out += "lognormal_sigma," + format_double(lognormal_sigma) + "\n";
  return out;
}

std::string MetricsReport::queues_csv() const {
  std::string out = "intersection,phase,second,queue\n";
  for (const auto& q : queues) {
    for (std::size_t i = 0; i < q.samples.size(); ++i) {
      out += std::to_string(q.intersection);
      out += ',';
      out += q.phase;
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += util::format_double(q.samples[i]);
      out += '\n';
    }
  }
  return out;
}

std::string MetricsReport::histogram_csv() const {
  std::string out = "bin_lo,bin_hi,count\n";
  for (const auto& b : velocity_histogram) {
    out += util::format_double(b.lo);
    out += ',';
    out += util::format_double(b.hi);
    out += ',';
    out += std::to_string(b.count);
    out += '\n';
  }
  return out;
}

}  // namespace aim::metrics
