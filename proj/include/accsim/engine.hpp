#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "accsim/controller.hpp"
#include "accsim/dynamics.hpp"
#include "accsim/scenario.hpp"

namespace accsim {

struct TraceRow {
  std::int64_t tick = 0;
  double time_s = 0.0;
  std::string vehicle_id;
  double position_m = 0.0;
  double speed_kmh = 0.0;
  double accel_mps2 = 0.0;
  double throttle = 0.0;
  double brake = 0.0;
  std::optional<double> gap_m;  // empty without an active leader
  double ssd_m = 0.0;
  ControlMode mode = ControlMode::Cruise;
  // Not part of the CSV; kept for in-process cost evaluation.
  double target_speed_kmh = 0.0;
};

struct CollisionEvent {
  std::int64_t tick = 0;
  double time_s = 0.0;
  std::string leader_id;
  std::string follower_id;
  double gap_m = 0.0;
  double leader_speed_kmh = 0.0;
  double follower_speed_kmh = 0.0;
};

enum class RunStatus { Completed, Collision, TimeCeiling };

std::string to_string(RunStatus status);

struct TraceLog {
  std::vector<std::string> vehicle_ids;  // front to rear
  std::vector<TraceRow> rows;            // by tick, then front to rear
  std::vector<std::optional<double>> travel_time_s;  // parallel to vehicle_ids
  std::vector<CollisionEvent> collisions;
  RunStatus status = RunStatus::Completed;
  std::int64_t ticks = 0;
  double dt_s = 0.0;
};

/// Bumper overlap check between consecutive vehicles. Touching (gap == 0)
/// is not a collision.
std::optional<CollisionEvent> detect_collision(const std::string& leader_id,
                                               const VehicleState& leader,
                                               const VehicleParams& leader_params,
                                               const std::string& follower_id,
                                               const VehicleState& follower, std::int64_t tick,
                                               double time_s);

/// Runs the fixed-step loop until every vehicle reaches the end of the
/// route, a collision occurs, or the time ceiling is exhausted.
///
/// Each tick reads a snapshot of all vehicle states, computes every
/// vehicle's command from that snapshot (front to rear), records one row
/// per active vehicle and then integrates. A vehicle stops being recorded
/// once its position reaches the route length; its travel time is that
/// tick times dt.
TraceLog run_simulation(const Scenario& scenario);

}  // namespace accsim
