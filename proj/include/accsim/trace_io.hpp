#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "accsim/engine.hpp"
#include "accsim/scenario.hpp"

namespace accsim {

inline constexpr const char* kTraceHeader =
    "tick,time_s,vehicle_id,position_m,speed_kmh,accel_mps2,throttle,brake,gap_m,ssd_m,mode";

/// Malformed trace CSV; `line()` is 1-based and counts the header.
class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// printf("%.6g") rendering used for every float in the CSV.
std::string format_6g(double value);

void write_trace_csv(const TraceLog& trace, std::ostream& out);
std::string trace_to_csv(const TraceLog& trace);

/// Parses rows back into a trace. Run-level fields (travel times, status)
/// are not part of the CSV and stay empty; vehicle order is the order of
/// first appearance.
TraceLog read_trace_csv(std::istream& in);

/// Per-vehicle travel times, collision events, status and the normalised
/// scenario the run used.
nlohmann::ordered_json run_summary_json(const Scenario& scenario, const TraceLog& trace);

}  // namespace accsim
