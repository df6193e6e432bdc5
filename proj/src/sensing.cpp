#include "accsim/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace accsim {

std::string to_string(WeatherName name) {
  switch (name) {
    case WeatherName::NoRain:
      return "no_rain";
    case WeatherName::HeavyRain:
      return "heavy_rain";
  }
  return "unknown";
}

std::optional<WeatherName> parse_weather_name(const std::string& text) {
  if (text == "no_rain") return WeatherName::NoRain;
  if (text == "heavy_rain") return WeatherName::HeavyRain;
  return std::nullopt;
}

double time_of_flight_range(double round_trip_time_s) {
  if (!std::isfinite(round_trip_time_s) || round_trip_time_s < 0.0) {
    throw std::invalid_argument("time_of_flight_range: round-trip time must be finite and >= 0");
  }
  return kSpeedOfLight * round_trip_time_s / 2.0;
}

RadarReading measure(const VehicleState& own, const VehicleState& leader,
                     const VehicleParams& leader_params, std::int64_t tick) {
  if (leader.position_m < own.position_m) {
    throw std::logic_error("measure: leader is behind the sensing vehicle");
  }
  RadarReading reading;
  reading.range_m = std::max(0.0, leader.position_m - own.position_m - leader_params.length_m);
  reading.relative_speed_kmh = leader.speed_kmh - own.speed_kmh;
  reading.measured_at_tick = tick;
  reading.round_trip_time_s = 2.0 * reading.range_m / kSpeedOfLight;
  return reading;
}

RadarReading delayed_reading(const std::deque<RadarReading>& history,
                             const WeatherCondition& weather, std::int64_t tick) {
  if (history.empty()) throw std::logic_error("delayed_reading: empty radar history");
  const std::int64_t wanted = tick - weather.latency_ticks;
  if (wanted <= history.front().measured_at_tick) return history.front();
  // Newest first: the wanted reading is almost always near the back.
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (it->measured_at_tick <= wanted) return *it;
  }
  return history.front();
}

Radar::Radar(double range_jitter_m, std::uint64_t seed)
    : range_jitter_m_(range_jitter_m), rng_(seed) {}

RadarReading Radar::sense(const VehicleState& own, const VehicleState& leader,
                          const VehicleParams& leader_params, const WeatherCondition& weather,
                          std::int64_t tick) {
  RadarReading fresh = measure(own, leader, leader_params, tick);
  if (range_jitter_m_ > 0.0) {
    std::uniform_real_distribution<double> jitter(-range_jitter_m_, range_jitter_m_);
    fresh.range_m = std::max(0.0, fresh.range_m + jitter(rng_));
    fresh.round_trip_time_s = 2.0 * fresh.range_m / kSpeedOfLight;
  }
  history_.push_back(fresh);
  const auto keep = static_cast<std::size_t>(std::max(0, weather.latency_ticks)) + 1;
  while (history_.size() > keep) history_.pop_front();
  return delayed_reading(history_, weather, tick);
}

}  // namespace accsim
