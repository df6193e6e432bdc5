#include "accsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "accsim/units.hpp"

namespace accsim {

namespace {

constexpr double kGravity = 9.81;

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ScenarioError(path + ": " + message);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

// Walks one JSON object, tracking which keys were consumed so leftovers can
// be reported as schema violations.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(display(), "expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json& child(const std::string& key) {
    if (!node_.contains(key)) fail(join(path_, key), "required field is missing");
    seen_.insert(key);
    return node_.at(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key) {
    const json& v = child(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path(key), "expected a finite number");
    return x;
  }

  double number_or(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::int64_t integer(const std::string& key) {
    const json& v = child(key);
    if (!v.is_number_integer()) fail(path(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::string string(const std::string& key) {
    const json& v = child(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }

  bool boolean_or(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = child(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) fail(join(path_, key), "unknown field");
    }
  }

 private:
  std::string display() const { return path_.empty() ? "<document>" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& message) {
  if (!ok) fail(path, message);
}

WeatherCondition read_weather(ObjectReader& top) {
  ObjectReader r(top.child("weather"), "weather");
  WeatherCondition w;
  const std::string name = r.string("name");
  const auto parsed = parse_weather_name(name);
  require(parsed.has_value(), r.path("name"), "must be \"no_rain\" or \"heavy_rain\", got \"" + name + "\"");
  w.name = *parsed;
  w.friction_f = r.number("friction_f");
  require(w.friction_f > 0.0 && w.friction_f <= 1.2, r.path("friction_f"), "must lie in (0, 1.2]");
  const std::int64_t latency = r.integer("latency_ticks");
  require(latency >= 0 && latency <= 100000, r.path("latency_ticks"), "must be a non-negative tick count");
  w.latency_ticks = static_cast<int>(latency);
  r.finish();
  return w;
}

SsdParams read_ssd(ObjectReader& top) {
  SsdParams s;
  if (!top.has("ssd")) return s;
  ObjectReader r(top.child("ssd"), "ssd");
  s.reaction_time_s = r.number_or("reaction_time_s", s.reaction_time_s);
  s.grade = r.number_or("grade", s.grade);
  require(s.reaction_time_s > 0.0, r.path("reaction_time_s"), "must be positive");
  r.finish();
  return s;
}

ControllerConfig read_controller(ObjectReader& top) {
  ControllerConfig c;
  if (top.has("pid")) {
    ObjectReader r(top.child("pid"), "pid");
    c.gains.kp = r.number_or("kp", c.gains.kp);
    c.gains.ki = r.number_or("ki", c.gains.ki);
    c.gains.kd = r.number_or("kd", c.gains.kd);
    c.u_scale = r.number_or("u_scale", c.u_scale);
    if (r.has("windup_bound")) c.windup_bound = r.number("windup_bound");
    require(c.gains.kp >= 0.0, r.path("kp"), "must be >= 0");
    require(c.gains.ki >= 0.0, r.path("ki"), "must be >= 0");
    require(c.gains.kd >= 0.0, r.path("kd"), "must be >= 0");
    require(c.u_scale > 0.0, r.path("u_scale"), "must be positive");
    require(!c.windup_bound || *c.windup_bound > 0.0, r.path("windup_bound"), "must be positive");
    r.finish();
  }
  if (top.has("acc")) {
    ObjectReader r(top.child("acc"), "acc");
    c.standstill_margin_m = r.number_or("standstill_margin_m", c.standstill_margin_m);
    c.emergency_hysteresis_m = r.number_or("emergency_hysteresis_m", c.emergency_hysteresis_m);
    require(c.standstill_margin_m >= 0.0, r.path("standstill_margin_m"), "must be >= 0");
    require(c.emergency_hysteresis_m >= 0.0, r.path("emergency_hysteresis_m"), "must be >= 0");
    r.finish();
  }
  return c;
}

VehicleParams read_params(ObjectReader& vr) {
  VehicleParams p;
  if (!vr.has("params")) return p;
  ObjectReader r(vr.child("params"), vr.path("params"));
  p.max_accel_mps2 = r.number_or("max_accel_mps2", p.max_accel_mps2);
  p.max_brake_decel_mps2 = r.number_or("max_brake_decel_mps2", p.max_brake_decel_mps2);
  p.max_speed_kmh = r.number_or("max_speed_kmh", p.max_speed_kmh);
  p.length_m = r.number_or("length_m", p.length_m);
  p.actuator_lag_s = r.number_or("actuator_lag_s", p.actuator_lag_s);
  require(p.max_accel_mps2 > 0.0, r.path("max_accel_mps2"), "must be positive");
  require(p.max_brake_decel_mps2 > 0.0, r.path("max_brake_decel_mps2"), "must be positive");
  require(p.max_speed_kmh > 0.0, r.path("max_speed_kmh"), "must be positive");
  require(p.length_m > 0.0, r.path("length_m"), "must be positive");
  require(p.actuator_lag_s >= 0.0, r.path("actuator_lag_s"), "must be >= 0");
  r.finish();
  return p;
}

BehaviorScript read_script(ObjectReader& vr, double route_length_m) {
  BehaviorScript script;
  if (!vr.has("script")) return script;
  const json& list = vr.child("script");
  const std::string base = vr.path("script");
  require(list.is_array(), base, "expected an array of directives");

  bool have_cruise = false;
  double last_position = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < list.size(); ++i) {
    ObjectReader r(list[i], base + "[" + std::to_string(i) + "]");
    const std::string type = r.string("type");
    if (type == "cruise_at") {
      require(!have_cruise, r.path("type"), "only one cruise_at directive is allowed");
      have_cruise = true;
      CruiseAt c{r.number("speed_kmh")};
      require(c.speed_kmh > 0.0, r.path("speed_kmh"), "must be positive");
      script.directives.emplace_back(c);
    } else if (type == "stop_at") {
      StopAt s{r.number("position_m"), r.number("duration_s")};
      require(s.position_m >= 0.0 && s.position_m <= route_length_m, r.path("position_m"),
              "must lie within [0, route_length_m]");
      require(s.duration_s >= 0.0, r.path("duration_s"), "must be >= 0");
      require(s.position_m >= last_position, r.path("position_m"),
              "directives must be sorted by position and must not overlap");
      last_position = s.position_m;
      script.directives.emplace_back(s);
    } else if (type == "speed_zone") {
      SpeedZone z{r.number("start_m"), r.number("end_m"), r.number("cap_kmh"), std::nullopt};
      if (r.has("curve_radius_m")) {
        z.curve_radius_m = r.number("curve_radius_m");
        require(*z.curve_radius_m > 0.0, r.path("curve_radius_m"), "must be positive");
      }
      require(z.start_m >= 0.0 && z.end_m <= route_length_m, r.path("start_m"),
              "zone must lie within [0, route_length_m]");
      require(z.start_m < z.end_m, r.path("end_m"), "must be greater than start_m");
      require(z.cap_kmh > 0.0, r.path("cap_kmh"), "must be positive");
      require(z.start_m >= last_position, r.path("start_m"),
              "directives must be sorted by position and must not overlap");
      last_position = z.end_m;
      script.directives.emplace_back(z);
    } else {
      fail(r.path("type"), "unknown directive \"" + type + "\"");
    }
    r.finish();
  }
  return script;
}

VehicleSpec read_vehicle(const json& node, const std::string& path, double route_length_m) {
  ObjectReader r(node, path);
  VehicleSpec v;
  v.id = r.string("id");
  require(!v.id.empty(), r.path("id"), "must not be empty");
  require(v.id.find_first_of(",\n\r\"") == std::string::npos, r.path("id"),
          "must not contain commas, quotes or newlines");
  const std::string role = r.string("role");
  if (role == "scripted") {
    v.role = VehicleRole::Scripted;
  } else if (role == "acc_controlled") {
    v.role = VehicleRole::AccControlled;
  } else {
    fail(r.path("role"), "must be \"scripted\" or \"acc_controlled\", got \"" + role + "\"");
  }
  v.initial.position_m = r.number_or("initial_position_m", 0.0);
  v.initial.speed_kmh = r.number_or("initial_speed_kmh", 0.0);
  require(v.initial.position_m >= 0.0, r.path("initial_position_m"), "must be >= 0");
  v.params = read_params(r);
  require(v.initial.speed_kmh >= 0.0 && v.initial.speed_kmh <= v.params.max_speed_kmh,
          r.path("initial_speed_kmh"), "must lie within [0, max_speed_kmh]");
  v.script = read_script(r, route_length_m);
  r.finish();
  return v;
}

}  // namespace

std::optional<double> BehaviorScript::cruise_speed() const {
  for (const auto& d : directives) {
    if (const auto* c = std::get_if<CruiseAt>(&d)) return c->speed_kmh;
  }
  return std::nullopt;
}

std::vector<StopAt> BehaviorScript::stops() const {
  std::vector<StopAt> out;
  for (const auto& d : directives) {
    if (const auto* s = std::get_if<StopAt>(&d)) out.push_back(*s);
  }
  return out;
}

std::vector<SpeedZone> BehaviorScript::zones() const {
  std::vector<SpeedZone> out;
  for (const auto& d : directives) {
    if (const auto* z = std::get_if<SpeedZone>(&d)) out.push_back(*z);
  }
  return out;
}

double curve_speed_kmh(double radius_m, const WeatherCondition& weather) {
  return mps_to_kmh(std::sqrt(weather.friction_f * kGravity * radius_m));
}

double SpeedZone::effective_cap_kmh(const WeatherCondition& weather) const {
  if (!curve_radius_m) return cap_kmh;
  return std::min(cap_kmh, curve_speed_kmh(*curve_radius_m, weather));
}

std::string to_string(VehicleRole role) {
  return role == VehicleRole::Scripted ? "scripted" : "acc_controlled";
}

Scenario load_scenario(const std::string& document) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("<document>: malformed JSON: ") + e.what());
  }

  ObjectReader top(root, "");
  Scenario s;
  s.route_length_m = top.number("route_length_m");
  require(s.route_length_m > 0.0, "route_length_m", "must be positive");
  s.dt_s = top.number_or("dt_s", s.dt_s);
  require(s.dt_s > 0.0, "dt_s", "must be positive");
  s.time_ceiling_s = top.number_or("time_ceiling_s", s.time_ceiling_s);
  require(s.time_ceiling_s > 0.0, "time_ceiling_s", "must be positive");
  require(s.time_ceiling_s / s.dt_s <= 1e8, "time_ceiling_s", "implies too many ticks for dt_s");
  s.weather = read_weather(top);
  s.cruise_target_kmh = top.number_or("cruise_target_kmh", s.cruise_target_kmh);
  require(s.cruise_target_kmh > 0.0, "cruise_target_kmh", "must be positive");
  s.ssd = read_ssd(top);
  require(std::abs(s.ssd.grade) < s.weather.friction_f, "ssd.grade",
          "magnitude must stay below weather.friction_f");
  s.controller = read_controller(top);

  if (top.has("seed")) {
    const json& seed = top.child("seed");
    require(seed.is_number_unsigned() || (seed.is_number_integer() && seed.get<std::int64_t>() >= 0),
            "seed", "expected a non-negative integer");
    s.seed = seed.get<std::uint64_t>();
  }
  if (top.has("noise")) {
    ObjectReader r(top.child("noise"), "noise");
    s.noise.enabled = r.boolean_or("enabled", false);
    s.noise.range_jitter_m = r.number_or("range_jitter_m", 0.0);
    require(s.noise.range_jitter_m >= 0.0, r.path("range_jitter_m"), "must be >= 0");
    r.finish();
  }

  const json& vehicles = top.child("vehicles");
  require(vehicles.is_array() && !vehicles.empty(), "vehicles", "expected a non-empty array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const std::string path = "vehicles[" + std::to_string(i) + "]";
    VehicleSpec v = read_vehicle(vehicles[i], path, s.route_length_m);
    require(ids.insert(v.id).second, path + ".id", "duplicate vehicle id \"" + v.id + "\"");
    const double cruise = v.script.cruise_speed().value_or(s.cruise_target_kmh);
    require(v.params.max_speed_kmh >= cruise, path + ".params.max_speed_kmh",
            "must be >= the cruise target of vehicle \"" + v.id + "\"");
    s.vehicles.push_back(std::move(v));
  }
  for (std::size_t i = 1; i < s.vehicles.size(); ++i) {
    const VehicleSpec& lead = s.vehicles[i - 1];
    const VehicleSpec& follow = s.vehicles[i];
    const double gap = lead.initial.position_m - lead.params.length_m - follow.initial.position_m;
    if (!(gap > 0.0)) {
      std::ostringstream msg;
      msg << "vehicles \"" << lead.id << "\" and \"" << follow.id
          << "\" overlap (initial bumper gap " << gap
          << " m); vehicles must be listed front to rear with positive gaps";
      fail("vehicles[" + std::to_string(i) + "].initial_position_m", msg.str());
    }
  }
  top.finish();
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path.string() + ": cannot open scenario file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return load_scenario(buffer.str());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

nlohmann::ordered_json scenario_to_json(const Scenario& s) {
  nlohmann::ordered_json doc;
  doc["route_length_m"] = s.route_length_m;
  doc["dt_s"] = s.dt_s;
  doc["time_ceiling_s"] = s.time_ceiling_s;
  doc["weather"] = {{"name", to_string(s.weather.name)},
                    {"friction_f", s.weather.friction_f},
                    {"latency_ticks", s.weather.latency_ticks}};
  doc["cruise_target_kmh"] = s.cruise_target_kmh;
  doc["ssd"] = {{"reaction_time_s", s.ssd.reaction_time_s}, {"grade", s.ssd.grade}};
  doc["pid"] = {{"kp", s.controller.gains.kp},
                {"ki", s.controller.gains.ki},
                {"kd", s.controller.gains.kd},
                {"u_scale", s.controller.u_scale},
                {"windup_bound", s.controller.effective_windup_bound()}};
  doc["acc"] = {{"standstill_margin_m", s.controller.standstill_margin_m},
                {"emergency_hysteresis_m", s.controller.emergency_hysteresis_m}};
  auto vehicles = nlohmann::ordered_json::array();
  for (const VehicleSpec& v : s.vehicles) {
    nlohmann::ordered_json jv;
    jv["id"] = v.id;
    jv["role"] = to_string(v.role);
    jv["initial_position_m"] = v.initial.position_m;
    jv["initial_speed_kmh"] = v.initial.speed_kmh;
    jv["params"] = {{"max_accel_mps2", v.params.max_accel_mps2},
                    {"max_brake_decel_mps2", v.params.max_brake_decel_mps2},
                    {"max_speed_kmh", v.params.max_speed_kmh},
                    {"length_m", v.params.length_m},
                    {"actuator_lag_s", v.params.actuator_lag_s}};
    auto script = nlohmann::ordered_json::array();
    for (const Directive& d : v.script.directives) {
      std::visit(
          [&script](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, CruiseAt>) {
              script.push_back({{"type", "cruise_at"}, {"speed_kmh", x.speed_kmh}});
            } else if constexpr (std::is_same_v<T, StopAt>) {
              script.push_back(
                  {{"type", "stop_at"}, {"position_m", x.position_m}, {"duration_s", x.duration_s}});
            } else {
              nlohmann::ordered_json z = {{"type", "speed_zone"},
                                          {"start_m", x.start_m},
                                          {"end_m", x.end_m},
                                          {"cap_kmh", x.cap_kmh}};
              if (x.curve_radius_m) z["curve_radius_m"] = *x.curve_radius_m;
              script.push_back(std::move(z));
            }
          },
          d);
    }
    jv["script"] = std::move(script);
    vehicles.push_back(std::move(jv));
  }
  doc["vehicles"] = std::move(vehicles);
  doc["seed"] = s.seed;
  doc["noise"] = {{"enabled", s.noise.enabled}, {"range_jitter_m", s.noise.range_jitter_m}};
  return doc;
}

ScriptProgress start_script(const BehaviorScript& script) {
  ScriptProgress progress;
  progress.stops.resize(script.stops().size());
  return progress;
}

std::pair<ScriptTarget, ScriptProgress> scripted_target_speed(const BehaviorScript& script,
                                                              const ScriptProgress& progress,
                                                              const VehicleState& state,
                                                              double clock_s,
                                                              const ScriptEnvironment& env) {
  ScriptTarget target;
  target.cruise_kmh = script.cruise_speed().value_or(env.default_cruise_kmh);
  target.limit_kmh = std::numeric_limits<double>::infinity();
  ScriptProgress next = progress;
  const double pos = state.position_m;

  const std::vector<StopAt> stops = script.stops();
  if (next.stops.size() != stops.size()) next.stops.resize(stops.size());
  for (std::size_t i = 0; i < stops.size(); ++i) {
    StopProgress& sp = next.stops[i];
    if (sp.phase == StopPhase::Done) continue;
    const double to_stop = stops[i].position_m - pos;

    if (sp.phase == StopPhase::Pending && to_stop < -kStopTolerance_m) {
      sp.phase = StopPhase::Done;  // overran the stop window
      continue;
    }
    if (sp.phase == StopPhase::Pending && std::abs(to_stop) <= kStopTolerance_m &&
        state.speed_kmh < kStoppedSpeed_kmh) {
      sp.phase = StopPhase::Dwelling;
      sp.dwell_started_s = clock_s;
    }
    if (sp.phase == StopPhase::Dwelling) {
      if (clock_s - sp.dwell_started_s >= stops[i].duration_s) {
        sp.phase = StopPhase::Done;
        continue;
      }
      target.limit_kmh = 0.0;
      return {target, next};
    }
    // Approaching: only the nearest outstanding stop constrains speed.
    if (std::abs(to_stop) <= kStopTolerance_m) {
      target.limit_kmh = 0.0;
    } else {
      target.limit_kmh = std::min(target.limit_kmh, invert_ssd(to_stop, env.weather, env.ssd));
    }
    break;
  }

  for (const SpeedZone& z : script.zones()) {
    const double cap = z.effective_cap_kmh(env.weather);
    if (pos >= z.start_m && pos < z.end_m) {
      target.limit_kmh = std::min(target.limit_kmh, cap);
    } else if (pos < z.start_m) {
      const double room = z.start_m - pos + compute_ssd(cap, env.weather, env.ssd);
      target.limit_kmh = std::min(target.limit_kmh, invert_ssd(room, env.weather, env.ssd));
    }
  }
  return {target, next};
}

}  // namespace accsim
