#include "accsim/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace accsim {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

double parse_double(const std::string& text, std::size_t line, const char* column) {
  if (text.empty()) throw TraceParseError(line, std::string("empty ") + column);
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(value)) {
    throw TraceParseError(line, std::string("bad number in ") + column + ": \"" + text + "\"");
  }
  return value;
}

std::int64_t parse_tick(const std::string& text, std::size_t line) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    throw TraceParseError(line, "bad tick \"" + text + "\"");
  }
  return value;
}

}  // namespace

TraceParseError::TraceParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

std::string format_6g(double value) { return fmt::format("{:.6g}", value); }

void write_trace_csv(const TraceLog& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const TraceRow& r : trace.rows) {
    out << r.tick << ',' << format_6g(r.time_s) << ',' << r.vehicle_id << ','
        << format_6g(r.position_m) << ',' << format_6g(r.speed_kmh) << ','
        << format_6g(r.accel_mps2) << ',' << format_6g(r.throttle) << ',' << format_6g(r.brake)
        << ',' << (r.gap_m ? format_6g(*r.gap_m) : std::string()) << ',' << format_6g(r.ssd_m)
        << ',' << to_string(r.mode) << '\n';
  }
}

std::string trace_to_csv(const TraceLog& trace) {
  std::ostringstream out;
  write_trace_csv(trace, out);
  return out.str();
}

TraceLog read_trace_csv(std::istream& in) {
  TraceLog trace;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw TraceParseError(1, "empty trace (missing header)");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw TraceParseError(1, "unexpected header \"" + line + "\"");

  std::set<std::string> seen;
  std::int64_t last_tick = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 11) {
      throw TraceParseError(line_no, "expected 11 fields, found " + std::to_string(f.size()));
    }
    TraceRow r;
    r.tick = parse_tick(f[0], line_no);
    if (r.tick < last_tick) throw TraceParseError(line_no, "ticks must be non-decreasing");
    last_tick = r.tick;
    r.time_s = parse_double(f[1], line_no, "time_s");
    r.vehicle_id = f[2];
    if (r.vehicle_id.empty()) throw TraceParseError(line_no, "empty vehicle_id");
    r.position_m = parse_double(f[3], line_no, "position_m");
    r.speed_kmh = parse_double(f[4], line_no, "speed_kmh");
    r.accel_mps2 = parse_double(f[5], line_no, "accel_mps2");
    r.throttle = parse_double(f[6], line_no, "throttle");
    r.brake = parse_double(f[7], line_no, "brake");
    if (!f[8].empty()) r.gap_m = parse_double(f[8], line_no, "gap_m");
    r.ssd_m = parse_double(f[9], line_no, "ssd_m");
    const auto mode = parse_control_mode(f[10]);
    if (!mode) throw TraceParseError(line_no, "unknown mode \"" + f[10] + "\"");
    r.mode = *mode;
    if (seen.insert(r.vehicle_id).second) trace.vehicle_ids.push_back(r.vehicle_id);
    trace.rows.push_back(std::move(r));
  }
  if (trace.rows.empty()) throw TraceParseError(line_no, "trace has no data rows");
  trace.travel_time_s.assign(trace.vehicle_ids.size(), std::nullopt);
  trace.ticks = trace.rows.back().tick + 1;
  return trace;
}

nlohmann::ordered_json run_summary_json(const Scenario& scenario, const TraceLog& trace) {
  nlohmann::ordered_json doc;
  doc["status"] = to_string(trace.status);
  doc["ticks"] = trace.ticks;
  doc["dt_s"] = trace.dt_s;
  auto travel = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < trace.vehicle_ids.size(); ++i) {
    nlohmann::ordered_json v;
    v["vehicle_id"] = trace.vehicle_ids[i];
    if (trace.travel_time_s[i]) {
      v["travel_time_s"] = *trace.travel_time_s[i];
    } else {
      v["travel_time_s"] = nullptr;
    }
    travel.push_back(std::move(v));
  }
  doc["travel_times"] = std::move(travel);
  auto collisions = nlohmann::ordered_json::array();
  for (const CollisionEvent& c : trace.collisions) {
    collisions.push_back({{"tick", c.tick},
                          {"time_s", c.time_s},
                          {"leader_id", c.leader_id},
                          {"follower_id", c.follower_id},
                          {"gap_m", c.gap_m},
                          {"leader_speed_kmh", c.leader_speed_kmh},
                          {"follower_speed_kmh", c.follower_speed_kmh}});
  }
  doc["collisions"] = std::move(collisions);
  doc["config"] = scenario_to_json(scenario);
  return doc;
}

}  // namespace accsim
