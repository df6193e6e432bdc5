// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "accsim/analytics.hpp"
#include "accsim/cli.hpp"
#include "accsim/engine.hpp"
#include "accsim/sensing.hpp"
#include "accsim/trace_io.hpp"
#include "accsim/tuner.hpp"
#include "support.hpp"

using namespace accsim;
namespace t = accsim::test_support;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Traces produced by criteria 4 and 5, re-checked by criterion 7.
std::vector<TraceLog> g_traces;

Outcome formula_range() {
  Outcome o;
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double T = 1e-3 * i / 1000.0;
    const double expected = kSpeedOfLight * T / 2.0;
    if (T > 0) worst = std::max(worst, rel(time_of_flight_range(T), expected));
    else o.check(time_of_flight_range(T) == 0.0, "T = 0 must give 0 m");
  }
  o.check(worst <= 1e-9, fmt::format("D = cT/2 relative error {:.3g}", worst));
  double worst_rt = 0.0;
  for (double range = 0.5; range < 150000.0; range *= 1.37) {
    const RadarReading r = measure({0.0, 50.0, 0.0}, {range + 4.7, 50.0, 0.0}, {}, 0);
    worst_rt = std::max(worst_rt, rel(time_of_flight_range(r.round_trip_time_s), r.range_m));
  }
  o.check(worst_rt <= 1e-9, fmt::format("measure round trip error {:.3g}", worst_rt));
  if (o.pass) o.detail = fmt::format("max rel err {:.2g}, round trip {:.2g}", worst, worst_rt);
  return o;
}

Outcome formula_ssd() {
  Outcome o;
  const double dry = compute_ssd(80.0, t::no_rain(), {});
  const double wet = compute_ssd(50.0, t::heavy_rain(), {});
  o.check(std::abs(dry - 91.60) <= 0.01, fmt::format("SSD(80, dry) = {:.4f}", dry));
  o.check(std::abs(wet - 59.36) <= 0.01, fmt::format("SSD(50, wet) = {:.4f}", wet));
  double worst = 0.0;
  for (const WeatherCondition& w : {t::no_rain(), t::heavy_rain()}) {
    for (double v = 0.0; v <= 200.0; v += 0.1) {
      const double d = compute_ssd(v, w, {});
      worst = std::max(worst, std::abs(compute_ssd(invert_ssd(d, w, {}), w, {}) - d));
    }
  }
  o.check(worst <= 1e-6, fmt::format("invert_ssd round trip {:.3g} m", worst));
  if (o.pass) o.detail = fmt::format("{:.4f} m / {:.4f} m, round trip {:.2g} m", dry, wet, worst);
  return o;
}

double closed_loop_error(const PidGains& gains, double disturbance_mps2) {
  ControllerConfig cfg;
  cfg.gains = gains;
  VehicleParams p;
  VehicleState s{0.0, 40.0, 0.0};
  PidState pid;
  for (int i = 0; i < 6000; ++i) {
    const PidOutput out = pid_step(pid, gains, 60.0, s.speed_kmh, 0.05, cfg.effective_windup_bound());
    pid = out.state;
    const ActuatorCommand cmd = lower_level(out.u, ControlMode::Cruise, cfg.u_scale);
    s = integrate_step(s, command_to_acceleration(cmd, p, s) - disturbance_mps2, 0.05, p);
  }
  return 60.0 - s.speed_kmh;
}

Outcome pid_law() {
  Outcome o;
  const PidOutput step = pid_step({}, {0.5, 0.1, 0.0}, 5.0, 0.0, 0.05, 100.0);
  o.check(std::abs(step.u - 2.525) <= 1e-12, fmt::format("single step u = {:.17g}", step.u));
  const double with_ki = closed_loop_error({0.8, 0.08, 0.05}, 0.5);
  const double without_ki = closed_loop_error({0.8, 0.0, 0.05}, 0.5);
  o.check(std::abs(with_ki) < 0.1, fmt::format("steady-state error with Ki {:.4g}", with_ki));
  o.check(std::abs(without_ki) > 0.5, fmt::format("offset without Ki {:.4g}", without_ki));
  if (o.pass) {
    o.detail = fmt::format("u = {:.12g}, |e| with Ki = {:.2g}, offset without Ki = {:.3f} km/h",
                           step.u, std::abs(with_ki), without_ki);
  }
  return o;
}

Outcome collision_freedom() {
  Outcome o;
  int runs = 0;
  for (const char* name : {"noon_no_rain.json", "noon_heavy_rain.json"}) {
    TraceLog trace = run_simulation(load_scenario_file(t::scenario_path(name)));
    o.check(trace.collisions.empty() && trace.status == RunStatus::Completed,
            fmt::format("{} ended {}", name, to_string(trace.status)));
    g_traces.push_back(std::move(trace));
    ++runs;
  }
  for (std::uint64_t seed : t::fuzz_seeds()) {
    for (const WeatherCondition& w : {t::no_rain(), t::heavy_rain()}) {
      TraceLog trace = run_simulation(t::fuzz_scenario(seed, w));
      o.check(trace.collisions.empty(),
              fmt::format("fuzz seed {} ({}) collided", seed, to_string(w.name)));
      g_traces.push_back(std::move(trace));
      ++runs;
    }
  }
  if (o.pass) o.detail = fmt::format("{} runs, 0 collisions", runs);
  return o;
}

Outcome weather_direction() {
  Outcome o;
  const TraceLog dry = run_simulation(load_scenario_file(t::scenario_path("noon_no_rain.json")));
  const TraceLog wet = run_simulation(load_scenario_file(t::scenario_path("noon_heavy_rain.json")));
  const ComparisonReport r = compare_runs(dry, wet, "no_rain", "heavy_rain");
  o.check(r.vehicles.size() == 3, "expected three vehicles");
  std::string summary;
  for (const VehicleComparison& v : r.vehicles) {
    const bool slower = v.travel_time_a_s && v.travel_time_b_s && *v.travel_time_b_s > *v.travel_time_a_s;
    o.check(slower, v.vehicle_id + ": travel time did not increase");
    o.check(v.speed_b.median < v.speed_a.median, v.vehicle_id + ": median speed did not drop");
    if (slower) {
      summary += fmt::format("{} +{:.1f}% time -{:.1f}% median; ", v.vehicle_id,
                             *v.travel_time_change_pct, *v.median_speed_drop_pct);
    }
  }
  g_traces.push_back(dry);
  g_traces.push_back(wet);
  if (o.pass) o.detail = summary.substr(0, summary.size() - 2);
  return o;
}

Outcome anova_oracles() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> k_dist(2, 5);
  std::uniform_int_distribution<int> n_dist(2, 20);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> centre(-50.0, 50.0);
  std::uniform_real_distribution<double> spread(0.1, 20.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> groups(static_cast<std::size_t>(k_dist(rng)));
    for (auto& g : groups) {
      const double mu = centre(rng);
      const double sd = spread(rng);
      const int n = n_dist(rng);
      for (int i = 0; i < n; ++i) g.push_back(mu + sd * noise(rng));
    }
    worst = std::max(worst, rel(one_way_anova(groups).f_statistic, t::anova_oracle(groups).f));
  }
  o.check(worst <= 1e-10, fmt::format("ANOVA vs oracle {:.3g}", worst));

  const AnovaResult hand = one_way_anova({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  o.check(std::abs(hand.f_statistic - 27.0) <= 1e-12 && hand.df_between == 2 &&
              hand.df_within == 6 && std::abs(hand.p_value - 0.001) <= 1e-15,
          fmt::format("hand case F = {}, p = {}", hand.f_statistic, hand.p_value));

  double worst_q = 0.0;
  for (double f : {0.3, 1.0, 2.5, 6.0, 15.0}) {
    for (auto [d1, d2] : {std::pair{1, 4}, {2, 6}, {3, 10}, {4, 20}, {5, 5}, {6, 30}, {8, 12},
                          {10, 50}, {2, 100}, {12, 8}}) {
      worst_q = std::max(worst_q,
                         std::abs(f_survival(f, d1, d2) - t::f_survival_quadrature(f, d1, d2)));
    }
  }
  o.check(worst_q <= 1e-8, fmt::format("f_survival vs quadrature {:.3g}", worst_q));
  if (o.pass) {
    o.detail = fmt::format("200 instances max rel {:.2g}; F=27 p={}; 50-point quadrature max {:.2g}",
                           worst, format_p_value(hand.p_value), worst_q);
  }
  return o;
}

Outcome actuation_bounds() {
  Outcome o;
  std::size_t rows = 0;
  for (const TraceLog& trace : g_traces) {
    for (const TraceRow& r : trace.rows) {
      ++rows;
      o.check(r.throttle >= 0.0 && r.throttle <= 1.0 && r.brake >= 0.0 && r.brake <= 1.0 &&
                  !(r.throttle > 0.0 && r.brake > 0.0),
              fmt::format("{} tick {}: throttle {} brake {}", r.vehicle_id, r.tick, r.throttle,
                          r.brake));
    }
  }
  o.check(rows > 0, "no traces from criteria 4-5");
  if (o.pass) o.detail = fmt::format("{} rows across {} traces", rows, g_traces.size());
  return o;
}

// Runs `command` into two fresh directories and compares every file.
void same_twice(Outcome& o, const std::string& name,
                const std::function<int(const fs::path&)>& command) {
  const fs::path a = t::fresh_dir("accept_" + name + "_1");
  const fs::path b = t::fresh_dir("accept_" + name + "_2");
  const int ca = command(a);
  const int cb = command(b);
  o.check(ca == cb, name + ": exit codes differ");
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    const fs::path other = b / e.path().filename();
    o.check(fs::exists(other) && t::slurp(e.path()) == t::slurp(other),
            name + ": " + e.path().filename().string() + " differs");
  }
  o.check(files > 0, name + ": wrote nothing");
}

Outcome determinism() {
  Outcome o;
  std::ostringstream err;
  const fs::path no_rain = t::scenario_path("noon_no_rain.json");
  const fs::path rain = t::scenario_path("noon_heavy_rain.json");
  same_twice(o, "run", [&](const fs::path& d) { return cmd_run(rain, d, err); });
  same_twice(o, "compare", [&](const fs::path& d) { return cmd_compare(no_rain, rain, d, err); });
  same_twice(o, "stats", [&](const fs::path& d) {
    return cmd_stats(t::golden_dir() / "noon_no_rain_trace.csv", AnovaGrouping::Spacing, d, err);
  });
  same_twice(o, "tune", [&](const fs::path& d) {
    return cmd_tune(t::scenario_path("tune_objective.json"), 200, d, err);
  });
  Scenario noisy = load_scenario_file(rain);
  noisy.noise = {true, 0.25};
  noisy.seed = 17;
  o.check(trace_to_csv(run_simulation(noisy)) == trace_to_csv(run_simulation(noisy)),
          "seeded noisy run differs");
  if (o.pass) o.detail = "run, compare, stats, tune and a seeded noisy trace are byte-identical";
  return o;
}

Outcome emergency_boundary() {
  Outcome o;
  std::size_t probes = 0;
  for (const WeatherCondition& w : {t::no_rain(), t::heavy_rain()}) {
    for (double v : {20.0, 50.0, 80.0, 130.0}) {
      const double ssd = compute_ssd(v, w, {});
      for (int k = -400; k <= 400; ++k) {
        const double range = ssd + 0.005 * k;
        UpperLevelInput in{RadarReading{range, 0.0, 0, 0.0}, v, 80.0, 80.0};
        const bool emergency =
            upper_level(in, w, {}, {}, false).mode == ControlMode::EmergencyBrake;
        o.check(emergency == (range < ssd), fmt::format("v={} range={} flips wrongly", v, range));
        ++probes;
      }
      UpperLevelInput just_below{RadarReading{std::nextafter(ssd, 0.0), 0.0, 0, 0.0}, v, 80, 80};
      UpperLevelInput at{RadarReading{ssd, 0.0, 0, 0.0}, v, 80, 80};
      o.check(upper_level(just_below, w, {}, {}, false).mode == ControlMode::EmergencyBrake,
              "one ulp below SSD is not emergency");
      o.check(upper_level(at, w, {}, {}, false).mode != ControlMode::EmergencyBrake,
              "range equal to SSD is emergency");

      // Latched: holds below SSD + 1 m, releases at SSD + 1 m.
      for (double extra : {0.0, 0.5, 0.99}) {
        UpperLevelInput held{RadarReading{ssd + extra, 0.0, 0, 0.0}, v, 80, 80};
        o.check(upper_level(held, w, {}, {}, true).mode == ControlMode::EmergencyBrake,
                fmt::format("latch released early at +{} m", extra));
      }
      UpperLevelInput clear{RadarReading{ssd + 1.0, 0.0, 0, 0.0}, v, 80, 80};
      o.check(upper_level(clear, w, {}, {}, true).mode != ControlMode::EmergencyBrake,
              "latch not released at SSD + 1 m");
    }
  }
  if (o.pass) o.detail = fmt::format("{} probes; release hysteresis 1 m confirmed", probes);
  return o;
}

Outcome tuner_contract() {
  Outcome o;
  const TuneObjective obj = load_objective_file(t::scenario_path("tune_objective.json"));
  const TuneResult r = tune(obj, 200);
  double start_best = std::numeric_limits<double>::infinity();
  for (const Evaluation& e : r.history) {
    if (e.phase != "descent") start_best = std::min(start_best, e.cost);
  }
  const double default_cost = evaluate_gains(PidGains{}, obj);
  o.check(r.history.size() <= 200, "history exceeds budget");
  o.check(r.best_cost <= start_best, fmt::format("tuned {} > best seed/grid {}", r.best_cost, start_best));
  o.check(r.best_cost <= default_cost, fmt::format("tuned {} > default {}", r.best_cost, default_cost));

  const GainBox box{GainBounds{0.0, 2.0}, GainBounds{0.0, 1.0}, GainBounds{0.0, 0.5}};
  const TuneResult s = tune([](const PidGains& g) { return std::pow(g.kp - 0.6, 2); }, box, 200);
  o.check(std::abs(s.best.kp - 0.6) <= 1e-3, fmt::format("surrogate kp = {}", s.best.kp));
  if (o.pass) {
    o.detail = fmt::format("step cost {:.2f} (default {:.2f}, best start {:.2f}); surrogate kp {:.6f}",
                           r.best_cost, default_cost, start_best, s.best.kp);
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"formula exactness: time-of-flight range", formula_range},
      {"formula exactness: stopping sight distance", formula_ssd},
      {"PID law", pid_law},
      {"collision freedom", collision_freedom},
      {"weather direction", weather_direction},
      {"ANOVA oracle equivalence", anova_oracles},
      {"actuation bounds", actuation_bounds},
      {"determinism", determinism},
      {"emergency-brake boundary", emergency_boundary},
      {"tuner contract", tuner_contract},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failed;
    std::cout << fmt::format("[{}] {:>2}. {} ({:.2f} s): {}\n", o.pass ? "PASS" : "FAIL", i + 1,
                             criteria[i].first, secs, o.detail);
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
