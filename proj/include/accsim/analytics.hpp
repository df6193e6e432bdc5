#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "accsim/engine.hpp"

namespace accsim {

/// Box-plot summary. Quartiles use linear interpolation between order
/// statistics at zero-based rank (n-1)*q (the "type 7" rule).
struct SpeedSummary {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double lower_whisker = 0.0;  // q1 - 1.5*iqr
  double upper_whisker = 0.0;  // q3 + 1.5*iqr
  std::vector<double> outliers;  // ascending
  std::size_t n = 0;
};

struct AnovaResult {
  double f_statistic = 0.0;  // +inf when f_infinite
  bool f_infinite = false;
  int df_between = 0;
  int df_within = 0;
  double p_value = 1.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  std::vector<double> group_means;
  double grand_mean = 0.0;
};

/// Raised when a numerical routine fails to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double quantile_type7(std::span<const double> sorted, double q);

SpeedSummary speed_summary(std::span<const double> samples);

/// Requires at least two groups, each with at least two samples.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

/// Regularised incomplete beta I_x(a, b), continued fraction (modified
/// Lentz) with the symmetry switch at x > (a+1)/(a+b+2).
double regularized_incomplete_beta(double x, double a, double b);

/// Upper tail P(F > f) of the F(d1, d2) distribution.
double f_survival(double f, int d1, int d2);

/// p-value text: 4 significant figures, scientific below 1e-4.
std::string format_p_value(double p);

/// (b - a) / a * 100; empty when a is zero.
std::optional<double> percent_change(double a, double b);

/// Per-vehicle speed samples in vehicle order, stationary ticks included.
std::vector<std::vector<double>> speed_samples(const TraceLog& trace);

struct SpacingSeries {
  std::string leader_id;
  std::string follower_id;
  std::vector<double> time_s;
  std::vector<double> spacing_m;  // bumper to bumper
};

/// Spacing over time for every ordered pair (leader ahead of follower),
/// sampled on ticks where both are on the route. Non-adjacent pairs are
/// reconstructed from positions and the intermediate gap column.
std::vector<SpacingSeries> spacing_series(const TraceLog& trace);

struct VehicleComparison {
  std::string vehicle_id;
  std::optional<double> travel_time_a_s;
  std::optional<double> travel_time_b_s;
  std::optional<double> travel_time_change_pct;  // (b - a) / a
  SpeedSummary speed_a;
  SpeedSummary speed_b;
  std::optional<double> median_speed_drop_pct;  // (a - b) / a
};

struct RunAnalysis {
  std::optional<AnovaResult> speed_anova;
  std::optional<AnovaResult> spacing_anova;
  std::vector<SpacingSeries> spacing;
};

struct ComparisonReport {
  std::string label_a;
  std::string label_b;
  std::vector<VehicleComparison> vehicles;
  RunAnalysis run_a;
  RunAnalysis run_b;
};

/// Vehicle sets of the two traces differ.
class VehicleMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunAnalysis analyse_run(const TraceLog& trace);

ComparisonReport compare_runs(const TraceLog& a, const TraceLog& b, std::string label_a = "a",
                              std::string label_b = "b");

}  // namespace accsim
