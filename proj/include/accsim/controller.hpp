#pragma once

#include <optional>
#include <string>

#include "accsim/dynamics.hpp"
#include "accsim/sensing.hpp"

namespace accsim {

struct SsdParams {
  double reaction_time_s = 2.5;
  double grade = 0.0;  // decimal fraction, +ve uphill
};

struct PidGains {
  double kp = 0.8;
  double ki = 0.08;
  double kd = 0.05;
};

struct PidState {
  double integral_accum = 0.0;  // km/h * s
  double prev_error = 0.0;      // km/h
  bool initialized = false;
};

enum class ControlMode { Cruise, Follow, EmergencyBrake };

std::string to_string(ControlMode mode);
std::optional<ControlMode> parse_control_mode(const std::string& text);

struct ControllerConfig {
  PidGains gains;
  double u_scale = 10.0;  // control signal (km/h) mapped to a full pedal
  // Integral clamp in km/h*s. Unset means u_scale / max(ki, eps).
  std::optional<double> windup_bound;
  double standstill_margin_m = 2.0;
  double emergency_hysteresis_m = 1.0;

  double effective_windup_bound() const;
};

/// Stopping distance in metres for a speed in km/h:
/// 0.278*t*v + v^2 / (254*(f + G)).
/// Throws std::invalid_argument if v < 0 or f + G <= 0.
double compute_ssd(double speed_kmh, const WeatherCondition& weather, const SsdParams& ssd);

/// Signed margin between the present distance and the stopping distance.
double compute_gap(double present_distance_m, double ssd_m);

/// Largest speed (km/h) whose stopping distance equals `available_distance_m`.
double invert_ssd(double available_distance_m, const WeatherCondition& weather,
                  const SsdParams& ssd);

struct UpperLevelInput {
  std::optional<RadarReading> reading;
  double own_speed_kmh = 0.0;
  double cruise_target_kmh = 0.0;
  double route_speed_cap_kmh = 0.0;
};

struct UpperLevelOutput {
  double target_speed_kmh = 0.0;
  ControlMode mode = ControlMode::Cruise;
};

/// Spacing/speed planner. Emergency braking engages when the range drops
/// below the stopping distance and, once `emergency_latched` is set, holds
/// until the range clears the stopping distance plus the hysteresis.
UpperLevelOutput upper_level(const UpperLevelInput& in, const WeatherCondition& weather,
                             const SsdParams& ssd, const ControllerConfig& config,
                             bool emergency_latched);

struct PidOutput {
  double u = 0.0;
  PidState state;
};

/// Discrete PID on the speed error (target - current): rectangular
/// integration with clamping, backward-difference derivative that is zero
/// on the first sample.
PidOutput pid_step(const PidState& state, const PidGains& gains, double target_kmh,
                   double current_kmh, double dt_s, double windup_bound);

/// Throttle/brake split of the control signal. Emergency mode forces a full
/// brake regardless of `u`.
ActuatorCommand lower_level(double u, ControlMode mode, double u_scale);

struct ControlStep {
  ActuatorCommand command;
  double target_speed_kmh = 0.0;
  ControlMode mode = ControlMode::Cruise;
  double u = 0.0;
};

/// Upper and lower level wired together with the memory they need.
class AccController {
 public:
  explicit AccController(ControllerConfig config);

  ControlStep step(const UpperLevelInput& in, const WeatherCondition& weather,
                   const SsdParams& ssd, double dt_s);

  const PidState& pid_state() const { return pid_; }
  bool emergency_latched() const { return latched_; }

 private:
  ControllerConfig config_;
  PidState pid_;
  bool latched_ = false;
};

/// Lower-level speed tracking alone, used by scripted vehicles.
class SpeedTracker {
 public:
  explicit SpeedTracker(ControllerConfig config);

  ControlStep step(double target_kmh, double current_kmh, double dt_s);

 private:
  ControllerConfig config_;
  PidState pid_;
};

}  // namespace accsim
