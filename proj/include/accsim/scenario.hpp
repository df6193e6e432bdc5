#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "accsim/controller.hpp"
#include "accsim/dynamics.hpp"
#include "accsim/sensing.hpp"

namespace accsim {

/// Invalid scenario document. what() starts with the offending field path.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CruiseAt {
  double speed_kmh = 0.0;
};

struct StopAt {
  double position_m = 0.0;
  double duration_s = 0.0;
};

struct SpeedZone {
  double start_m = 0.0;
  double end_m = 0.0;
  double cap_kmh = 0.0;
  // Curve radius; when set, the cap also never exceeds the friction-limited
  // cornering speed sqrt(f * g * R).
  std::optional<double> curve_radius_m;

  double effective_cap_kmh(const WeatherCondition& weather) const;
};

/// Highest steady cornering speed (km/h) on a flat curve of the given radius.
double curve_speed_kmh(double radius_m, const WeatherCondition& weather);

using Directive = std::variant<CruiseAt, StopAt, SpeedZone>;

struct BehaviorScript {
  std::vector<Directive> directives;

  std::optional<double> cruise_speed() const;
  std::vector<StopAt> stops() const;
  std::vector<SpeedZone> zones() const;
};

enum class VehicleRole { Scripted, AccControlled };

std::string to_string(VehicleRole role);

struct VehicleSpec {
  std::string id;
  VehicleRole role = VehicleRole::Scripted;
  VehicleParams params;
  VehicleState initial;
  BehaviorScript script;
};

struct NoiseConfig {
  bool enabled = false;
  double range_jitter_m = 0.0;
};

struct Scenario {
  double route_length_m = 0.0;
  double dt_s = 0.05;
  double time_ceiling_s = 120.0;
  WeatherCondition weather;
  double cruise_target_kmh = 80.0;
  SsdParams ssd;
  ControllerConfig controller;
  std::vector<VehicleSpec> vehicles;  // front to rear
  std::uint64_t seed = 0;
  NoiseConfig noise;
};

Scenario load_scenario(const std::string& document);

/// Reads and validates a scenario file. Errors name the path.
Scenario load_scenario_file(const std::filesystem::path& path);

/// Normalised document with every default filled in; loading it yields an
/// equivalent scenario.
nlohmann::ordered_json scenario_to_json(const Scenario& scenario);

/// Constants the script planner shares with the engine.
inline constexpr double kStopTolerance_m = 1.0;
inline constexpr double kStoppedSpeed_kmh = 0.5;

enum class StopPhase { Pending, Dwelling, Done };

struct StopProgress {
  StopPhase phase = StopPhase::Pending;
  double dwell_started_s = 0.0;
};

/// Bookkeeping for the stop directives of one script, in script order.
struct ScriptProgress {
  std::vector<StopProgress> stops;
};

ScriptProgress start_script(const BehaviorScript& script);

struct ScriptTarget {
  double cruise_kmh = 0.0;  // cruise directive (or scenario default)
  double limit_kmh = 0.0;   // tightest of zone cap, stop hold and approach limits
  double target_kmh() const { return cruise_kmh < limit_kmh ? cruise_kmh : limit_kmh; }
};

struct ScriptEnvironment {
  double default_cruise_kmh = 80.0;
  WeatherCondition weather;
  SsdParams ssd;
};

/// Target speed a scripted vehicle should track at `clock_s`, and the
/// updated stop bookkeeping. Holds zero while a stop is active; otherwise
/// the cruise speed limited by the active zone cap and by the speed from
/// which the vehicle can still settle at the next stop or zone cap within
/// its stopping distance.
std::pair<ScriptTarget, ScriptProgress> scripted_target_speed(const BehaviorScript& script,
                                                              const ScriptProgress& progress,
                                                              const VehicleState& state,
                                                              double clock_s,
                                                              const ScriptEnvironment& env);

}  // namespace accsim
