#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>

#include "accsim/dynamics.hpp"

namespace accsim {

/// Speed of electromagnetic waves in vacuum, m/s (exact SI value).
inline constexpr double kSpeedOfLight = 299'792'458.0;

struct RadarReading {
  double range_m = 0.0;           // bumper to bumper
  double relative_speed_kmh = 0.0;  // leader minus own
  std::int64_t measured_at_tick = 0;
  double round_trip_time_s = 0.0;
};

enum class WeatherName { NoRain, HeavyRain };

struct WeatherCondition {
  WeatherName name = WeatherName::NoRain;
  double friction_f = 0.70;
  int latency_ticks = 0;
};

std::string to_string(WeatherName name);
std::optional<WeatherName> parse_weather_name(const std::string& text);

/// D = c*T/2. Throws std::invalid_argument for negative or non-finite T.
double time_of_flight_range(double round_trip_time_s);

/// Radar return for the nearest leader. The range is clamped at zero on
/// contact; the implied round-trip time is filled in so that
/// time_of_flight_range(reading.round_trip_time_s) reproduces the range.
/// Throws std::logic_error when the leader is behind the sensing vehicle.
RadarReading measure(const VehicleState& own, const VehicleState& leader,
                     const VehicleParams& leader_params, std::int64_t tick);

/// Reading stamped `tick - latency_ticks`, or the oldest one held when the
/// run is younger than the latency. `history` must be non-empty and sorted
/// by tick.
RadarReading delayed_reading(const std::deque<RadarReading>& history,
                             const WeatherCondition& weather, std::int64_t tick);

/// Per-vehicle radar with a latency buffer and optional uniform range jitter.
class Radar {
 public:
  Radar(double range_jitter_m, std::uint64_t seed);

  /// Records the fresh reading for `tick` and returns what the controller
  /// sees after latency and jitter.
  RadarReading sense(const VehicleState& own, const VehicleState& leader,
                     const VehicleParams& leader_params, const WeatherCondition& weather,
                     std::int64_t tick);

 private:
  std::deque<RadarReading> history_;
  double range_jitter_m_;
  std::mt19937_64 rng_;
};

}  // namespace accsim
