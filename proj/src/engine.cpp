#include "accsim/engine.hpp"

#include <array>
#include <cmath>
#include <random>

#include "accsim/sensing.hpp"

namespace accsim {

namespace {

// Everything a vehicle carries between ticks.
struct Agent {
  const VehicleSpec* spec = nullptr;
  VehicleState state;
  ScriptProgress script;
  std::optional<AccController> acc;
  std::optional<SpeedTracker> tracker;
  std::optional<Radar> radar;
  bool active = true;
};

std::uint64_t radar_seed(std::uint64_t scenario_seed, std::size_t vehicle_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(scenario_seed),
                    static_cast<std::uint32_t>(scenario_seed >> 32),
                    static_cast<std::uint32_t>(vehicle_index)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed:
      return "completed";
    case RunStatus::Collision:
      return "collision";
    case RunStatus::TimeCeiling:
      return "time_ceiling";
  }
  return "unknown";
}

std::optional<CollisionEvent> detect_collision(const std::string& leader_id,
                                               const VehicleState& leader,
                                               const VehicleParams& leader_params,
                                               const std::string& follower_id,
                                               const VehicleState& follower, std::int64_t tick,
                                               double time_s) {
  const double gap = leader.position_m - leader_params.length_m - follower.position_m;
  if (gap >= 0.0) return std::nullopt;
  return CollisionEvent{tick,      time_s,          leader_id,         follower_id,
                        gap,       leader.speed_kmh, follower.speed_kmh};
}

TraceLog run_simulation(const Scenario& scenario) {
  const std::size_t n = scenario.vehicles.size();
  const double dt = scenario.dt_s;
  const auto max_ticks = static_cast<std::int64_t>(std::ceil(scenario.time_ceiling_s / dt - 1e-9));
  const double jitter = scenario.noise.enabled ? scenario.noise.range_jitter_m : 0.0;
  const ScriptEnvironment env{scenario.cruise_target_kmh, scenario.weather, scenario.ssd};

  std::vector<Agent> agents(n);
  TraceLog log;
  log.dt_s = dt;
  log.travel_time_s.assign(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    const VehicleSpec& spec = scenario.vehicles[i];
    Agent& a = agents[i];
    a.spec = &spec;
    a.state = spec.initial;
    a.script = start_script(spec.script);
    if (spec.role == VehicleRole::AccControlled) {
      a.acc.emplace(scenario.controller);
      a.radar.emplace(jitter, radar_seed(scenario.seed, i));
    } else {
      a.tracker.emplace(scenario.controller);
    }
    log.vehicle_ids.push_back(spec.id);
  }

  std::vector<VehicleState> snapshot(n);
  std::vector<ActuatorCommand> commands(n);
  for (std::int64_t tick = 0;; ++tick) {
    const double time_s = static_cast<double>(tick) * dt;

    bool any_active = false;
    for (std::size_t i = 0; i < n; ++i) {
      Agent& a = agents[i];
      if (a.active && a.state.position_m >= scenario.route_length_m) {
        a.active = false;
        log.travel_time_s[i] = time_s;
      }
      any_active = any_active || a.active;
    }
    if (!any_active) {
      log.status = RunStatus::Completed;
      log.ticks = tick;
      break;
    }

    for (std::size_t i = 1; i < n; ++i) {
      if (!agents[i].active || !agents[i - 1].active) continue;
      auto hit = detect_collision(agents[i - 1].spec->id, agents[i - 1].state,
                                  agents[i - 1].spec->params, agents[i].spec->id, agents[i].state,
                                  tick, time_s);
      if (hit) log.collisions.push_back(*hit);
    }
    if (!log.collisions.empty()) {
      log.status = RunStatus::Collision;
      log.ticks = tick;
      break;
    }
    if (tick >= max_ticks) {
      log.status = RunStatus::TimeCeiling;
      log.ticks = tick;
      break;
    }

    for (std::size_t i = 0; i < n; ++i) snapshot[i] = agents[i].state;

    for (std::size_t i = 0; i < n; ++i) {
      Agent& a = agents[i];
      if (!a.active) continue;
      const VehicleState& own = snapshot[i];
      // Order never inverts, so an active vehicle's leader is the one just ahead.
      const bool has_leader = i > 0 && agents[i - 1].active;

      auto [script_target, progress] =
          scripted_target_speed(a.spec->script, a.script, own, time_s, env);
      a.script = progress;

      TraceRow row;
      row.tick = tick;
      row.time_s = time_s;
      row.vehicle_id = a.spec->id;
      row.position_m = own.position_m;
      row.speed_kmh = own.speed_kmh;
      row.accel_mps2 = own.accel_mps2;
      row.ssd_m = compute_ssd(own.speed_kmh, scenario.weather, scenario.ssd);
      if (has_leader) {
        row.gap_m = snapshot[i - 1].position_m - agents[i - 1].spec->params.length_m -
                    own.position_m;
      }

      ControlStep step;
      if (a.acc) {
        UpperLevelInput in;
        in.own_speed_kmh = own.speed_kmh;
        in.cruise_target_kmh = script_target.cruise_kmh;
        in.route_speed_cap_kmh = script_target.limit_kmh;
        if (has_leader) {
          in.reading = a.radar->sense(own, snapshot[i - 1], agents[i - 1].spec->params,
                                      scenario.weather, tick);
        }
        step = a.acc->step(in, scenario.weather, scenario.ssd, dt);
      } else {
        step = a.tracker->step(script_target.target_kmh(), own.speed_kmh, dt);
      }
      commands[i] = step.command;
      row.throttle = step.command.throttle;
      row.brake = step.command.brake;
      row.mode = step.mode;
      row.target_speed_kmh = step.target_speed_kmh;
      log.rows.push_back(std::move(row));
    }

    for (std::size_t i = 0; i < n; ++i) {
      Agent& a = agents[i];
      if (!a.active) continue;
      const VehicleParams& p = a.spec->params;
      const double desired = command_to_acceleration(commands[i], p, snapshot[i]);
      const double realised = apply_actuator_lag(snapshot[i].accel_mps2, desired, p, dt);
      a.state = integrate_step(snapshot[i], realised, dt, p);
    }
  }
  return log;
}

}  // namespace accsim
