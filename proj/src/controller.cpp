#include "accsim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace accsim {

namespace {

constexpr double kReactionFactor = 0.278;  // km/h -> m/s, as tabulated
constexpr double kBrakingFactor = 254.0;
constexpr double kGainEpsilon = 1e-9;

double braking_denominator(const WeatherCondition& weather, const SsdParams& ssd) {
  const double denom = kBrakingFactor * (weather.friction_f + ssd.grade);
  if (!(denom > 0.0)) {
    throw std::invalid_argument("stopping distance: friction + grade must be positive");
  }
  return denom;
}

}  // namespace

std::string to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::Cruise:
      return "cruise";
    case ControlMode::Follow:
      return "follow";
    case ControlMode::EmergencyBrake:
      return "emergency_brake";
  }
  return "unknown";
}

std::optional<ControlMode> parse_control_mode(const std::string& text) {
  if (text == "cruise") return ControlMode::Cruise;
  if (text == "follow") return ControlMode::Follow;
  if (text == "emergency_brake") return ControlMode::EmergencyBrake;
  return std::nullopt;
}

double ControllerConfig::effective_windup_bound() const {
  if (windup_bound) return *windup_bound;
  return u_scale / std::max(gains.ki, kGainEpsilon);
}

double compute_ssd(double speed_kmh, const WeatherCondition& weather, const SsdParams& ssd) {
  if (speed_kmh < 0.0) throw std::invalid_argument("compute_ssd: negative speed");
  const double denom = braking_denominator(weather, ssd);
  return kReactionFactor * ssd.reaction_time_s * speed_kmh + speed_kmh * speed_kmh / denom;
}

double compute_gap(double present_distance_m, double ssd_m) { return present_distance_m - ssd_m; }

double invert_ssd(double available_distance_m, const WeatherCondition& weather,
                  const SsdParams& ssd) {
  if (available_distance_m <= 0.0) return 0.0;
  // Positive root of v^2/denom + b*v - d = 0 in the cancellation-free form.
  const double a = 1.0 / braking_denominator(weather, ssd);
  const double b = kReactionFactor * ssd.reaction_time_s;
  const double d = available_distance_m;
  return 2.0 * d / (b + std::sqrt(b * b + 4.0 * a * d));
}

UpperLevelOutput upper_level(const UpperLevelInput& in, const WeatherCondition& weather,
                             const SsdParams& ssd, const ControllerConfig& config,
                             bool emergency_latched) {
  const double free_speed = std::min(in.cruise_target_kmh, in.route_speed_cap_kmh);
  if (!in.reading) return {free_speed, ControlMode::Cruise};

  const double range = in.reading->range_m;
  const double stopping = compute_ssd(in.own_speed_kmh, weather, ssd);
  const bool emergency = emergency_latched ? range < stopping + config.emergency_hysteresis_m
                                           : range < stopping;
  if (emergency) return {0.0, ControlMode::EmergencyBrake};

  const double gap_speed =
      invert_ssd(std::max(0.0, range - config.standstill_margin_m), weather, ssd);
  if (gap_speed < free_speed) return {gap_speed, ControlMode::Follow};
  return {free_speed, ControlMode::Cruise};
}

PidOutput pid_step(const PidState& state, const PidGains& gains, double target_kmh,
                   double current_kmh, double dt_s, double windup_bound) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("pid_step: dt must be positive");
  const double error = target_kmh - current_kmh;

  PidOutput out;
  out.state.integral_accum =
      std::clamp(state.integral_accum + error * dt_s, -windup_bound, windup_bound);
  const double derivative = state.initialized ? (error - state.prev_error) / dt_s : 0.0;
  out.state.prev_error = error;
  out.state.initialized = true;
  out.u = gains.kp * error + gains.ki * out.state.integral_accum + gains.kd * derivative;
  return out;
}

ActuatorCommand lower_level(double u, ControlMode mode, double u_scale) {
  if (mode == ControlMode::EmergencyBrake) return {0.0, 1.0};
  if (u >= 0.0) return {std::clamp(u / u_scale, 0.0, 1.0), 0.0};
  return {0.0, std::clamp(-u / u_scale, 0.0, 1.0)};
}

AccController::AccController(ControllerConfig config) : config_(std::move(config)) {}

ControlStep AccController::step(const UpperLevelInput& in, const WeatherCondition& weather,
                                const SsdParams& ssd, double dt_s) {
  const UpperLevelOutput plan = upper_level(in, weather, ssd, config_, latched_);
  latched_ = plan.mode == ControlMode::EmergencyBrake;

  const PidOutput pid = pid_step(pid_, config_.gains, plan.target_speed_kmh, in.own_speed_kmh,
                                 dt_s, config_.effective_windup_bound());
  pid_ = pid.state;

  ControlStep out;
  out.command = lower_level(pid.u, plan.mode, config_.u_scale);
  out.target_speed_kmh = plan.target_speed_kmh;
  out.mode = plan.mode;
  out.u = pid.u;
  return out;
}

SpeedTracker::SpeedTracker(ControllerConfig config) : config_(std::move(config)) {}

ControlStep SpeedTracker::step(double target_kmh, double current_kmh, double dt_s) {
  const PidOutput pid = pid_step(pid_, config_.gains, target_kmh, current_kmh, dt_s,
                                 config_.effective_windup_bound());
  pid_ = pid.state;

  ControlStep out;
  out.command = lower_level(pid.u, ControlMode::Cruise, config_.u_scale);
  out.target_speed_kmh = target_kmh;
  out.mode = ControlMode::Cruise;
  out.u = pid.u;
  return out;
}

}  // namespace accsim
