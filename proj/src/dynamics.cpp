#include "accsim/dynamics.hpp"

#include <algorithm>
#include <stdexcept>

#include "accsim/units.hpp"

namespace accsim {

bool is_valid(const ActuatorCommand& cmd) {
  const bool in_range =
      cmd.throttle >= 0.0 && cmd.throttle <= 1.0 && cmd.brake >= 0.0 && cmd.brake <= 1.0;
  return in_range && cmd.throttle * cmd.brake == 0.0;
}

double command_to_acceleration(const ActuatorCommand& cmd, const VehicleParams& params,
                               const VehicleState& state) {
  const double accel =
      cmd.throttle * params.max_accel_mps2 - cmd.brake * params.max_brake_decel_mps2;
  if (accel > 0.0 && state.speed_kmh >= params.max_speed_kmh) return 0.0;
  if (accel < 0.0 && state.speed_kmh <= 0.0) return 0.0;
  return accel;
}

double apply_actuator_lag(double current_accel, double desired_accel, const VehicleParams& params,
                          double dt_s) {
  if (params.actuator_lag_s <= 0.0) return desired_accel;
  const double alpha = std::min(1.0, dt_s / params.actuator_lag_s);
  return current_accel + alpha * (desired_accel - current_accel);
}

VehicleState integrate_step(const VehicleState& state, double accel_mps2, double dt_s,
                            const VehicleParams& params) {
  if (!(dt_s > 0.0)) throw std::invalid_argument("integrate_step: dt must be positive");

  const double v0 = kmh_to_mps(state.speed_kmh);
  const double v_max = kmh_to_mps(params.max_speed_kmh);
  const double unclamped = v0 + accel_mps2 * dt_s;
  const double v1 = std::clamp(unclamped, 0.0, v_max);

  VehicleState next;
  next.speed_kmh = mps_to_kmh(v1);
  next.position_m = state.position_m + 0.5 * (v0 + v1) * dt_s;
  next.accel_mps2 = (v1 == unclamped) ? accel_mps2 : (v1 - v0) / dt_s;
  return next;
}

}  // namespace accsim
