#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "accsim/analytics.hpp"
#include "accsim/engine.hpp"

namespace accsim {

enum class AnovaGrouping { Speed, Spacing };

struct StatsReport {
  std::vector<std::string> vehicle_ids;
  std::vector<SpeedSummary> speed;
  std::optional<AnovaGrouping> grouping;
  std::optional<AnovaResult> anova;
};

/// Per-vehicle speed summaries plus the requested ANOVA. Throws
/// std::invalid_argument when the grouping leaves fewer than two groups.
StatsReport compute_stats(const TraceLog& trace, std::optional<AnovaGrouping> grouping);

nlohmann::ordered_json to_json(const SpeedSummary& s);
nlohmann::ordered_json to_json(const AnovaResult& r);
nlohmann::ordered_json to_json(const StatsReport& r);
nlohmann::ordered_json to_json(const ComparisonReport& r);

std::string to_text(const StatsReport& r);
std::string to_text(const ComparisonReport& r);

/// Long-format speed samples: vehicle_id,time_s,speed_kmh.
std::string speeds_csv(const TraceLog& trace);

/// Long-format spacing samples: leader_id,follower_id,time_s,spacing_m.
std::string spacing_csv(const std::vector<SpacingSeries>& series);

/// Line chart of spacing over time, one polyline per vehicle pair.
std::string spacing_svg(const std::vector<SpacingSeries>& series, const std::string& title);

}  // namespace accsim
