#include "accsim/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace accsim {

namespace {

constexpr double kCfTolerance = 1e-12;
constexpr int kCfMaxIterations = 10000;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a,b) (modified Lentz).
double beta_continued_fraction(double x, double a, double b) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kCfMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;

    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kCfTolerance) return h;
  }
  throw NumericalError(fmt::format(
      "incomplete beta continued fraction did not converge (x={}, a={}, b={})", x, a, b));
}

double log_beta_prefactor(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
         b * std::log1p(-x);
}

std::size_t index_of(const std::vector<std::string>& ids, const std::string& id) {
  return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
}

std::optional<AnovaResult> anova_if_possible(const std::vector<std::vector<double>>& groups) {
  std::vector<std::vector<double>> usable;
  for (const auto& g : groups) {
    if (g.size() >= 2) usable.push_back(g);
  }
  if (usable.size() < 2) return std::nullopt;
  return one_way_anova(usable);
}

}  // namespace

double quantile_type7(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

SpeedSummary speed_summary(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("speed_summary: empty sample set");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  SpeedSummary s;
  s.n = sorted.size();
  s.q1 = quantile_type7(sorted, 0.25);
  s.median = quantile_type7(sorted, 0.5);
  s.q3 = quantile_type7(sorted, 0.75);
  s.iqr = s.q3 - s.q1;
  s.lower_whisker = s.q1 - 1.5 * s.iqr;
  s.upper_whisker = s.q3 + 1.5 * s.iqr;
  for (double x : sorted) {
    if (x < s.lower_whisker || x > s.upper_whisker) s.outliers.push_back(x);
  }
  return s;
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw std::invalid_argument("one_way_anova: need at least 2 groups");
  std::size_t total_n = 0;
  double total_sum = 0.0;
  AnovaResult r;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].size() < 2) {
      throw std::invalid_argument(
          fmt::format("one_way_anova: group {} has fewer than 2 samples", i));
    }
    const double sum = std::accumulate(groups[i].begin(), groups[i].end(), 0.0);
    r.group_means.push_back(sum / static_cast<double>(groups[i].size()));
    total_sum += sum;
    total_n += groups[i].size();
  }
  r.grand_mean = total_sum / static_cast<double>(total_n);

  double ss_total = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double dm = r.group_means[i] - r.grand_mean;
    r.ss_between += static_cast<double>(groups[i].size()) * dm * dm;
    for (double x : groups[i]) {
      r.ss_within += (x - r.group_means[i]) * (x - r.group_means[i]);
      ss_total += (x - r.grand_mean) * (x - r.grand_mean);
    }
  }
  if (std::abs(r.ss_between + r.ss_within - ss_total) > 1e-9 * ss_total + kTiny) {
    throw std::logic_error("one_way_anova: sum-of-squares decomposition does not close");
  }

  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(total_n - groups.size());
  if (r.ss_between == 0.0) {
    r.f_statistic = 0.0;
    r.p_value = 1.0;
  } else if (r.ss_within == 0.0) {
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.f_infinite = true;
    r.p_value = 0.0;
  } else {
    const double ms_between = r.ss_between / r.df_between;
    const double ms_within = r.ss_within / r.df_within;
    r.f_statistic = ms_between / ms_within;
    r.p_value = f_survival(r.f_statistic, r.df_between, r.df_within);
  }
  return r;
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_beta_prefactor(x, a, b)) * beta_continued_fraction(x, a, b) / a;
  }
  return 1.0 - std::exp(log_beta_prefactor(1.0 - x, b, a)) *
                   beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_survival(double f, int d1, int d2) {
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("f_survival: degrees of freedom must be >= 1");
  if (std::isnan(f) || f < 0.0) throw std::invalid_argument("f_survival: f must be >= 0");
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  // 1 - I_x(d1/2, d2/2) == I_{1-x}(d2/2, d1/2), which keeps small tails exact.
  const double y = static_cast<double>(d2) / (static_cast<double>(d1) * f + d2);
  return regularized_incomplete_beta(y, d2 / 2.0, d1 / 2.0);
}

std::string format_p_value(double p) {
  if (p != 0.0 && p < 1e-4) return fmt::format("{:.3e}", p);
  return fmt::format("{:.4g}", p);
}

std::optional<double> percent_change(double a, double b) {
  if (a == 0.0) return std::nullopt;
  return (b - a) / a * 100.0;
}

std::vector<std::vector<double>> speed_samples(const TraceLog& trace) {
  std::vector<std::vector<double>> out(trace.vehicle_ids.size());
  for (const TraceRow& r : trace.rows) {
    const std::size_t i = index_of(trace.vehicle_ids, r.vehicle_id);
    if (i < out.size()) out[i].push_back(r.speed_kmh);
  }
  return out;
}

std::vector<SpacingSeries> spacing_series(const TraceLog& trace) {
  const std::size_t n = trace.vehicle_ids.size();
  std::vector<SpacingSeries> out;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      out.push_back({trace.vehicle_ids[i], trace.vehicle_ids[j], {}, {}});
    }
  }

  std::vector<const TraceRow*> at_tick(n, nullptr);
  auto flush = [&]() {
    std::size_t pair = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j, ++pair) {
        const TraceRow* next = at_tick[i + 1];
        if (!at_tick[i] || !at_tick[j] || !next || !next->gap_m) continue;
        // Leader's rear bumper sits at next.position + next.gap.
        out[pair].time_s.push_back(at_tick[j]->time_s);
        out[pair].spacing_m.push_back(next->position_m + *next->gap_m - at_tick[j]->position_m);
      }
    }
    std::fill(at_tick.begin(), at_tick.end(), nullptr);
  };

  std::optional<std::int64_t> current;
  for (const TraceRow& r : trace.rows) {
    if (current && r.tick != *current) flush();
    current = r.tick;
    const std::size_t i = index_of(trace.vehicle_ids, r.vehicle_id);
    if (i < n) at_tick[i] = &r;
  }
  if (current) flush();
  return out;
}

RunAnalysis analyse_run(const TraceLog& trace) {
  RunAnalysis run;
  run.spacing = spacing_series(trace);
  run.speed_anova = anova_if_possible(speed_samples(trace));
  std::vector<std::vector<double>> spacing_groups;
  for (const auto& s : run.spacing) spacing_groups.push_back(s.spacing_m);
  run.spacing_anova = anova_if_possible(spacing_groups);
  return run;
}

ComparisonReport compare_runs(const TraceLog& a, const TraceLog& b, std::string label_a,
                              std::string label_b) {
  std::vector<std::string> ids_a = a.vehicle_ids;
  std::vector<std::string> ids_b = b.vehicle_ids;
  std::sort(ids_a.begin(), ids_a.end());
  std::sort(ids_b.begin(), ids_b.end());
  if (ids_a != ids_b) {
    auto list = [](const std::vector<std::string>& ids) {
      return "[" + fmt::format("{}", fmt::join(ids, ", ")) + "]";
    };
    throw VehicleMismatchError("vehicle ids differ between runs: " + list(a.vehicle_ids) +
                               " vs " + list(b.vehicle_ids));
  }

  ComparisonReport report;
  report.label_a = std::move(label_a);
  report.label_b = std::move(label_b);
  const auto speeds_a = speed_samples(a);
  const auto speeds_b = speed_samples(b);
  for (std::size_t i = 0; i < a.vehicle_ids.size(); ++i) {
    const std::size_t k = index_of(b.vehicle_ids, a.vehicle_ids[i]);
    VehicleComparison v;
    v.vehicle_id = a.vehicle_ids[i];
    if (i < a.travel_time_s.size()) v.travel_time_a_s = a.travel_time_s[i];
    if (k < b.travel_time_s.size()) v.travel_time_b_s = b.travel_time_s[k];
    if (v.travel_time_a_s && v.travel_time_b_s) {
      v.travel_time_change_pct = percent_change(*v.travel_time_a_s, *v.travel_time_b_s);
    }
    if (speeds_a[i].empty() || speeds_b[k].empty()) {
      throw std::invalid_argument("compare_runs: vehicle \"" + v.vehicle_id +
                                  "\" has no speed samples");
    }
    v.speed_a = speed_summary(speeds_a[i]);
    v.speed_b = speed_summary(speeds_b[k]);
    if (auto change = percent_change(v.speed_a.median, v.speed_b.median)) {
      v.median_speed_drop_pct = -*change;
    }
    report.vehicles.push_back(std::move(v));
  }
  report.run_a = analyse_run(a);
  report.run_b = analyse_run(b);
  return report;
}

}  // namespace accsim
