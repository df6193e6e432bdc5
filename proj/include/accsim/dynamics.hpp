#pragma once

// Point-mass longitudinal vehicle model.
//
// Speeds cross the API in km/h, distances in metres and accelerations in
// m/s^2. The integrator converts to m/s once per step.

namespace accsim {

struct VehicleParams {
  double max_accel_mps2 = 3.0;
  double max_brake_decel_mps2 = 8.0;
  double max_speed_kmh = 220.0;
  double length_m = 4.7;
  // First-order powertrain/brake response time. 0 means the commanded
  // acceleration is applied instantly.
  double actuator_lag_s = 0.0;
};

struct VehicleState {
  double position_m = 0.0;
  double speed_kmh = 0.0;
  double accel_mps2 = 0.0;
};

struct ActuatorCommand {
  double throttle = 0.0;
  double brake = 0.0;
};

/// True when both pedals lie in [0,1] and at most one is engaged.
bool is_valid(const ActuatorCommand& cmd);

/// Affine pedal map a = throttle*max_accel - brake*max_brake, with no push
/// past max_speed and no pull below standstill.
double command_to_acceleration(const ActuatorCommand& cmd, const VehicleParams& params,
                               const VehicleState& state);

/// Moves the realised acceleration toward `desired` with the vehicle's
/// actuator lag. Returns `desired` unchanged when the lag is zero.
double apply_actuator_lag(double current_accel, double desired_accel, const VehicleParams& params,
                          double dt_s);

/// Semi-implicit Euler step: speed first (clamped to [0, max_speed]), then
/// position from the mean of old and new speed. The returned accel is the
/// one actually realised after clamping.
VehicleState integrate_step(const VehicleState& state, double accel_mps2, double dt_s,
                            const VehicleParams& params);

}  // namespace accsim
