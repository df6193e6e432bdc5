#include "accsim/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "accsim/trace_io.hpp"

namespace accsim {

namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kQuartileMethod = "linear interpolation at rank (n-1)q (type 7)";

ojson optional_number(const std::optional<double>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

std::string text_or_dash(const std::optional<double>& v, const char* spec = "{:.2f}") {
  return v ? fmt::format(fmt::runtime(spec), *v) : std::string("-");
}

std::string anova_line(const std::optional<AnovaResult>& r) {
  if (!r) return "n/a (fewer than two groups)";
  const std::string f = r->f_infinite ? "inf" : fmt::format("{:.4f}", r->f_statistic);
  return fmt::format("F({}, {}) = {}, p = {}", r->df_between, r->df_within, f,
                     format_p_value(r->p_value));
}

std::string grouping_name(AnovaGrouping g) {
  return g == AnovaGrouping::Speed ? "speed" : "spacing";
}

}  // namespace

StatsReport compute_stats(const TraceLog& trace, std::optional<AnovaGrouping> grouping) {
  StatsReport report;
  report.vehicle_ids = trace.vehicle_ids;
  for (const auto& samples : speed_samples(trace)) report.speed.push_back(speed_summary(samples));
  report.grouping = grouping;
  if (!grouping) return report;

  std::vector<std::vector<double>> groups;
  if (*grouping == AnovaGrouping::Speed) {
    groups = speed_samples(trace);
  } else {
    for (auto& s : spacing_series(trace)) groups.push_back(std::move(s.spacing_m));
  }
  std::erase_if(groups, [](const auto& g) { return g.size() < 2; });
  if (groups.size() < 2) {
    throw std::invalid_argument(fmt::format(
        "{} ANOVA needs at least two groups with two or more samples; the trace has {}",
        grouping_name(*grouping), groups.size()));
  }
  report.anova = one_way_anova(groups);
  return report;
}

ojson to_json(const SpeedSummary& s) {
  ojson j;
  j["n"] = s.n;
  j["median_kmh"] = s.median;
  j["q1_kmh"] = s.q1;
  j["q3_kmh"] = s.q3;
  j["iqr_kmh"] = s.iqr;
  j["lower_whisker_kmh"] = s.lower_whisker;
  j["upper_whisker_kmh"] = s.upper_whisker;
  j["outliers_kmh"] = s.outliers;
  return j;
}

ojson to_json(const AnovaResult& r) {
  ojson j;
  j["f_statistic"] = r.f_infinite ? ojson(nullptr) : ojson(r.f_statistic);
  j["f_infinite"] = r.f_infinite;
  j["df_between"] = r.df_between;
  j["df_within"] = r.df_within;
  j["p_value"] = r.p_value;
  j["p_value_display"] = format_p_value(r.p_value);
  j["ss_between"] = r.ss_between;
  j["ss_within"] = r.ss_within;
  j["group_means"] = r.group_means;
  j["grand_mean"] = r.grand_mean;
  return j;
}

ojson to_json(const StatsReport& r) {
  ojson j;
  j["quartile_method"] = kQuartileMethod;
  ojson vehicles = ojson::array();
  for (std::size_t i = 0; i < r.vehicle_ids.size(); ++i) {
    ojson v;
    v["vehicle_id"] = r.vehicle_ids[i];
    v["speed"] = to_json(r.speed[i]);
    vehicles.push_back(std::move(v));
  }
  j["vehicles"] = std::move(vehicles);
  if (r.grouping && r.anova) {
    ojson a = to_json(*r.anova);
    a["grouping"] = grouping_name(*r.grouping);
    j["anova"] = std::move(a);
  } else {
    j["anova"] = nullptr;
  }
  return j;
}

ojson to_json(const ComparisonReport& r) {
  ojson j;
  j["run_a"] = r.label_a;
  j["run_b"] = r.label_b;
  j["quartile_method"] = kQuartileMethod;
  j["travel_time_change_basis"] = "(travel_time_b - travel_time_a) / travel_time_a * 100";
  j["median_speed_drop_basis"] = "(median_a - median_b) / median_a * 100";

  ojson vehicles = ojson::array();
  for (const VehicleComparison& v : r.vehicles) {
    ojson jv;
    jv["vehicle_id"] = v.vehicle_id;
    jv["travel_time_a_s"] = optional_number(v.travel_time_a_s);
    jv["travel_time_b_s"] = optional_number(v.travel_time_b_s);
    jv["travel_time_change_pct"] = optional_number(v.travel_time_change_pct);
    jv["speed_a"] = to_json(v.speed_a);
    jv["speed_b"] = to_json(v.speed_b);
    jv["median_speed_drop_pct"] = optional_number(v.median_speed_drop_pct);
    vehicles.push_back(std::move(jv));
  }
  j["vehicles"] = std::move(vehicles);

  auto run = [](const RunAnalysis& a) {
    ojson jr;
    jr["speed_anova"] = a.speed_anova ? to_json(*a.speed_anova) : ojson(nullptr);
    jr["spacing_anova"] = a.spacing_anova ? to_json(*a.spacing_anova) : ojson(nullptr);
    ojson pairs = ojson::array();
    for (const SpacingSeries& s : a.spacing) {
      pairs.push_back({{"leader_id", s.leader_id},
                       {"follower_id", s.follower_id},
                       {"samples", s.spacing_m.size()}});
    }
    jr["spacing_pairs"] = std::move(pairs);
    return jr;
  };
  j["analysis_a"] = run(r.run_a);
  j["analysis_b"] = run(r.run_b);
  return j;
}

std::string to_text(const StatsReport& r) {
  std::ostringstream out;
  out << fmt::format("Speed summary (km/h), quartiles by {}\n", kQuartileMethod);
  out << fmt::format("{:<20} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9}\n", "vehicle", "n", "median",
                     "q1", "q3", "iqr", "outliers");
  for (std::size_t i = 0; i < r.vehicle_ids.size(); ++i) {
    const SpeedSummary& s = r.speed[i];
    out << fmt::format("{:<20} {:>6} {:>9.2f} {:>9.2f} {:>9.2f} {:>9.2f} {:>9}\n",
                       r.vehicle_ids[i], s.n, s.median, s.q1, s.q3, s.iqr, s.outliers.size());
  }
  if (r.grouping) {
    out << fmt::format("\nOne-way ANOVA on {}: {}\n", grouping_name(*r.grouping),
                       anova_line(r.anova));
  }
  return out.str();
}

std::string to_text(const ComparisonReport& r) {
  std::ostringstream out;
  out << fmt::format("Run comparison: a = {}, b = {}\n\n", r.label_a, r.label_b);
  out << "Travel time change = (b - a) / a; median speed drop = (median_a - median_b) / median_a\n";
  out << fmt::format("{:<20} {:>9} {:>9} {:>10} {:>10} {:>10} {:>10}\n", "vehicle", "time_a",
                     "time_b", "change_%", "median_a", "median_b", "drop_%");
  for (const VehicleComparison& v : r.vehicles) {
    out << fmt::format("{:<20} {:>9} {:>9} {:>10} {:>10.2f} {:>10.2f} {:>10}\n", v.vehicle_id,
                       text_or_dash(v.travel_time_a_s), text_or_dash(v.travel_time_b_s),
                       text_or_dash(v.travel_time_change_pct), v.speed_a.median,
                       v.speed_b.median, text_or_dash(v.median_speed_drop_pct));
  }
  out << fmt::format("\nIQR (km/h)\n{:<20} {:>10} {:>10}\n", "vehicle", "iqr_a", "iqr_b");
  for (const VehicleComparison& v : r.vehicles) {
    out << fmt::format("{:<20} {:>10.2f} {:>10.2f}\n", v.vehicle_id, v.speed_a.iqr,
                       v.speed_b.iqr);
  }
  out << "\nOne-way ANOVA across vehicles\n";
  out << fmt::format("  speed   [{}]: {}\n", r.label_a, anova_line(r.run_a.speed_anova));
  out << fmt::format("  speed   [{}]: {}\n", r.label_b, anova_line(r.run_b.speed_anova));
  out << fmt::format("  spacing [{}]: {}\n", r.label_a, anova_line(r.run_a.spacing_anova));
  out << fmt::format("  spacing [{}]: {}\n", r.label_b, anova_line(r.run_b.spacing_anova));
  return out.str();
}

std::string speeds_csv(const TraceLog& trace) {
  std::ostringstream out;
  out << "vehicle_id,time_s,speed_kmh\n";
  for (const std::string& id : trace.vehicle_ids) {
    for (const TraceRow& r : trace.rows) {
      if (r.vehicle_id == id) {
        out << id << ',' << format_6g(r.time_s) << ',' << format_6g(r.speed_kmh) << '\n';
      }
    }
  }
  return out.str();
}

std::string spacing_csv(const std::vector<SpacingSeries>& series) {
  std::ostringstream out;
  out << "leader_id,follower_id,time_s,spacing_m\n";
  for (const SpacingSeries& s : series) {
    for (std::size_t k = 0; k < s.time_s.size(); ++k) {
      out << s.leader_id << ',' << s.follower_id << ',' << format_6g(s.time_s[k]) << ','
          << format_6g(s.spacing_m[k]) << '\n';
    }
  }
  return out.str();
}

std::string spacing_svg(const std::vector<SpacingSeries>& series, const std::string& title) {
  constexpr double kWidth = 800.0;
  constexpr double kHeight = 450.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 190.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 50.0;
  constexpr std::array<const char*, 6> kColours = {"#1f77b4", "#d62728", "#2ca02c",
                                                   "#ff7f0e", "#9467bd", "#8c564b"};

  double t_max = 0.0;
  double s_max = 0.0;
  for (const SpacingSeries& s : series) {
    for (double t : s.time_s) t_max = std::max(t_max, t);
    for (double v : s.spacing_m) s_max = std::max(s_max, v);
  }
  t_max = t_max > 0.0 ? std::ceil(t_max / 5.0) * 5.0 : 1.0;
  s_max = s_max > 0.0 ? std::ceil(s_max / 10.0) * 10.0 : 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](double t) { return kLeft + t / t_max * plot_w; };
  auto y_of = [&](double s) { return kTop + plot_h - s / s_max * plot_h; };

  std::ostringstream out;
  out << fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << fmt::format("<text x=\"{:.1f}\" y=\"24\" font-size=\"15\">{}</text>\n", kLeft, title);
  out << fmt::format(
      "<path d=\"M{:.1f},{:.1f} L{:.1f},{:.1f} L{:.1f},{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
      kLeft, kTop, kLeft, kTop + plot_h, kLeft + plot_w, kTop + plot_h);

  for (int k = 0; k <= 5; ++k) {
    const double t = t_max * k / 5.0;
    const double s = s_max * k / 5.0;
    out << fmt::format(
        "<path d=\"M{:.1f},{:.1f} L{:.1f},{:.1f}\" stroke=\"black\"/>"
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:g}</text>\n",
        x_of(t), kTop + plot_h, x_of(t), kTop + plot_h + 5, x_of(t), kTop + plot_h + 20, t);
    out << fmt::format(
        "<path d=\"M{:.1f},{:.1f} L{:.1f},{:.1f}\" stroke=\"black\"/>"
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:g}</text>\n",
        kLeft - 5, y_of(s), kLeft, y_of(s), kLeft - 8, y_of(s) + 4, s);
  }
  out << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">time (s)</text>\n",
                     kLeft + plot_w / 2, kHeight - 10);
  out << fmt::format(
      "<text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">"
      "spacing (m)</text>\n",
      kTop + plot_h / 2, kTop + plot_h / 2);

  for (std::size_t i = 0; i < series.size(); ++i) {
    const SpacingSeries& s = series[i];
    const char* colour = kColours[i % kColours.size()];
    if (!s.time_s.empty()) {
      out << "<path fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colour << "\" d=\"";
      for (std::size_t k = 0; k < s.time_s.size(); ++k) {
        out << fmt::format("{}{:.1f},{:.1f}", k == 0 ? "M" : " L", x_of(s.time_s[k]),
                           y_of(s.spacing_m[k]));
      }
      out << "\"/>\n";
    }
    const double ly = kTop + 10 + 20.0 * static_cast<double>(i);
    out << fmt::format(
        "<path d=\"M{:.1f},{:.1f} L{:.1f},{:.1f}\" stroke=\"{}\" stroke-width=\"2\"/>"
        "<text x=\"{:.1f}\" y=\"{:.1f}\">{} - {}</text>\n",
        kLeft + plot_w + 10, ly, kLeft + plot_w + 30, ly, colour, kLeft + plot_w + 35, ly + 4,
        s.follower_id, s.leader_id);
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace accsim
