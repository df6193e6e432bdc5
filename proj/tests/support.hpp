#pragma once

// Shared helpers for the unit and acceptance tests: fixture paths, the
// randomized scenario generator and the reference implementations used as
// independent oracles.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "accsim/controller.hpp"
#include "accsim/scenario.hpp"

namespace accsim::test_support {

inline std::filesystem::path scenario_dir() { return ACCSIM_SCENARIO_DIR; }
inline std::filesystem::path golden_dir() { return ACCSIM_GOLDEN_DIR; }
inline std::filesystem::path scenario_path(const std::string& name) {
  return scenario_dir() / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("accsim_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline WeatherCondition no_rain() { return {WeatherName::NoRain, 0.70, 0}; }
inline WeatherCondition heavy_rain() { return {WeatherName::HeavyRain, 0.40, 8}; }

/// Three-vehicle platoon: a scripted leader with a random stop and speed
/// zone, then two ACC followers. Every initial gap is at least the
/// follower's stopping distance at its initial speed plus the standstill
/// margin.
inline Scenario fuzz_scenario(std::uint64_t seed, const WeatherCondition& weather) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  Scenario s;
  s.route_length_m = std::round(uni(300.0, 600.0));
  s.time_ceiling_s = 300.0;
  s.weather = weather;
  s.seed = seed;
  s.controller.windup_bound = 25.0;

  VehicleParams params;
  params.actuator_lag_s = uni(0.0, 0.4);

  const double cruise = std::round(uni(40.0, 90.0));
  const double stop_pos = std::round(uni(0.25, 0.45) * s.route_length_m);
  const double dwell = std::round(uni(0.5, 6.0) * 10.0) / 10.0;
  const double zone_start = std::round(uni(0.55, 0.7) * s.route_length_m);
  const double zone_end = zone_start + std::round(uni(20.0, 80.0));
  const double zone_cap = std::round(uni(20.0, 60.0));

  std::vector<double> v0(3);
  for (double& v : v0) v = std::round(uni(0.0, 60.0));

  double pos = 0.0;
  std::vector<VehicleSpec> rear_to_front;
  const char* ids[] = {"lead", "middle", "rear"};
  for (int i = 2; i >= 0; --i) {
    VehicleSpec v;
    v.id = ids[i];
    v.role = i == 0 ? VehicleRole::Scripted : VehicleRole::AccControlled;
    v.params = params;
    v.initial.position_m = pos;
    v.initial.speed_kmh = v0[static_cast<std::size_t>(i)];
    if (i == 0) {
      v.script.directives.push_back(CruiseAt{cruise});
      if (stop_pos > pos + 10.0) v.script.directives.push_back(StopAt{stop_pos, dwell});
      v.script.directives.push_back(SpeedZone{zone_start, zone_end, zone_cap, std::nullopt});
    }
    rear_to_front.push_back(v);
    if (i > 0) {
      const double follower_ssd = compute_ssd(v.initial.speed_kmh, weather, s.ssd);
      const double gap = follower_ssd + s.controller.standstill_margin_m + uni(0.0, 30.0);
      pos += gap + params.length_m;
    }
  }
  s.vehicles.assign(rear_to_front.rbegin(), rear_to_front.rend());
  return s;
}

inline std::vector<std::uint64_t> fuzz_seeds() {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t k = 0; k < 25; ++k) seeds.push_back(1000 + 7 * k);
  return seeds;
}

/// Sums of squares and F from first principles in 50-digit arithmetic.
struct AnovaOracle {
  double f = 0.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
};

inline AnovaOracle anova_oracle(const std::vector<std::vector<double>>& groups) {
  using big = boost::multiprecision::cpp_bin_float_50;
  big grand = 0;
  std::size_t n = 0;
  std::vector<big> means;
  for (const auto& g : groups) {
    big sum = 0;
    for (double x : g) sum += x;
    means.push_back(sum / g.size());
    grand += sum;
    n += g.size();
  }
  grand /= n;
  big ssb = 0;
  big ssw = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    ssb += (means[i] - grand) * (means[i] - grand) * groups[i].size();
    for (double x : groups[i]) ssw += (x - means[i]) * (x - means[i]);
  }
  const big dfb = groups.size() - 1;
  const big dfw = n - groups.size();
  return {static_cast<double>((ssb / dfb) / (ssw / dfw)), static_cast<double>(ssb),
          static_cast<double>(ssw)};
}

/// P(F > f) by integrating the F(d1, d2) density over [f, inf).
inline double f_survival_quadrature(double f, int d1, int d2) {
  const double a = d1 / 2.0;
  const double b = d2 / 2.0;
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(static_cast<double>(d1) / d2);
  auto density = [&](double t) {
    const double x = f + t;
    return std::exp(log_norm + (a - 1.0) * std::log(x) -
                    (a + b) * std::log1p(static_cast<double>(d1) * x / d2));
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(density, 1e-14);
}

}  // namespace accsim::test_support
