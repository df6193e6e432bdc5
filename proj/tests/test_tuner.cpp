#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "accsim/tuner.hpp"
#include "support.hpp"

using namespace accsim;
using accsim::test_support::scenario_path;

namespace {

const GainBox kBox{GainBounds{0.0, 2.0}, GainBounds{0.0, 1.0}, GainBounds{0.0, 0.5}};

TuneObjective step_objective() { return load_objective_file(scenario_path("tune_objective.json")); }

}  // namespace

TEST(Cost, ZeroGainsAreDominated) {
  const TuneObjective obj = step_objective();
  EXPECT_GT(evaluate_gains({0.0, 0.0, 0.0}, obj), evaluate_gains(PidGains{}, obj));
}

TEST(Cost, PerfectTrackingIsFree) {
  Scenario s;
  s.cruise_target_kmh = 80.0;
  VehicleSpec v;
  v.id = "ego";
  v.role = VehicleRole::AccControlled;
  s.vehicles.push_back(v);
  TraceLog t;
  t.vehicle_ids = {"ego"};
  t.dt_s = 0.05;
  for (std::int64_t k = 0; k < 100; ++k) {
    TraceRow r;
    r.tick = k;
    r.time_s = 0.05 * static_cast<double>(k);
    r.vehicle_id = "ego";
    r.speed_kmh = 80.0;
    r.target_speed_kmh = 80.0;
    t.rows.push_back(r);
  }
  const CostBreakdown c = cost_from_trace(t, s, TuneWeights{});
  EXPECT_EQ(c.itae, 0.0);
  EXPECT_EQ(c.overshoot, 0.0);
  EXPECT_EQ(c.total, 0.0);
}

TEST(Cost, DoublingKpIncreasesOvershoot) {
  const TuneObjective obj = step_objective();
  const CostBreakdown base = evaluate_breakdown({0.8, 0.08, 0.05}, obj.scenario, obj.weights);
  const CostBreakdown doubled = evaluate_breakdown({1.6, 0.08, 0.05}, obj.scenario, obj.weights);
  EXPECT_GT(doubled.overshoot, base.overshoot);
}

TEST(Cost, CollisionPenaltyApplies) {
  TraceLog t;
  t.status = RunStatus::Collision;
  Scenario s;
  const CostBreakdown c = cost_from_trace(t, s, TuneWeights{});
  EXPECT_TRUE(c.collision);
  EXPECT_EQ(c.total, 1e6);
}

TEST(Cost, GainsOutsideBoundsRejected) {
  EXPECT_THROW(evaluate_gains({10.0, 0.0, 0.0}, step_objective()), std::invalid_argument);
}

TEST(Tune, GridOnlyBudgetReturnsBestGridPoint) {
  auto cost = [](const PidGains& g) {
    return std::pow(g.kp - 0.9, 2) + std::pow(g.ki - 0.6, 2) + std::pow(g.kd - 0.1, 2);
  };
  const TuneResult r = tune(cost, kBox, kGridPoints);
  ASSERT_EQ(r.history.size(), kGridPoints);
  EXPECT_EQ(r.best.kp, 1.0);
  EXPECT_EQ(r.best.ki, 0.5);
  EXPECT_EQ(r.best.kd, 0.0);
}

TEST(Tune, BudgetBelowGridRejected) {
  EXPECT_THROW(tune([](const PidGains&) { return 0.0; }, kBox, kGridPoints - 1), TuneError);
}

TEST(Tune, ConvexSurrogateOneDimensional) {
  const TuneResult r = tune([](const PidGains& g) { return std::pow(g.kp - 0.6, 2); }, kBox, 200);
  EXPECT_NEAR(r.best.kp, 0.6, 1e-3);
  EXPECT_LE(r.history.size(), 200u);
}

TEST(Tune, ConvexSurrogateAllCoordinates) {
  auto cost = [](const PidGains& g) {
    return std::pow(g.kp - 0.6, 2) + 3.0 * std::pow(g.ki - 0.23, 2) + std::pow(g.kd - 0.11, 2);
  };
  const TuneResult r = tune(cost, kBox, 300);
  EXPECT_NEAR(r.best.kp, 0.6, 1e-3);
  EXPECT_NEAR(r.best.ki, 0.23, 1e-3);
  EXPECT_NEAR(r.best.kd, 0.11, 1e-3);
}

TEST(Tune, NeverWorseThanGridOrSeeds) {
  auto cost = [](const PidGains& g) { return std::abs(std::sin(7.0 * g.kp) + g.ki - g.kd); };
  const PidGains seed{0.31, 0.2, 0.4};
  const TuneResult r = tune(cost, kBox, 80, {seed});
  double start_best = cost(seed);
  for (const Evaluation& e : r.history) {
    if (e.phase != "descent") start_best = std::min(start_best, e.cost);
  }
  EXPECT_LE(r.best_cost, start_best);
  EXPECT_EQ(r.history[kGridPoints].phase, "seed");
}

TEST(Tune, StepObjectiveHistoryReEvaluates) {
  const TuneObjective obj = step_objective();
  const TuneResult r = tune(obj, 60);
  EXPECT_LE(r.history.size(), 60u);
  EXPECT_LE(r.best_cost, evaluate_gains(PidGains{}, obj));
  for (std::size_t i = 0; i < r.history.size(); i += 7) {
    EXPECT_EQ(evaluate_gains(r.history[i].gains, obj), r.history[i].cost);
  }
}

TEST(Tune, Deterministic) {
  const TuneObjective obj = step_objective();
  EXPECT_EQ(history_csv(tune(obj, 50)), history_csv(tune(obj, 50)));
}

TEST(Objective, Validation) {
  const auto dir = scenario_path("");
  EXPECT_NO_THROW(load_objective(R"({"scenario": "step_80.json"})", dir));
  EXPECT_THROW(load_objective(R"({})", dir), TuneError);
  EXPECT_THROW(load_objective(R"({"scenario": "nope.json"})", dir), TuneError);
  EXPECT_THROW(load_objective(
                   R"({"scenario": "step_80.json",
                       "weights": {"itae": 0, "overshoot": 0, "collision_penalty": 0}})",
                   dir),
               TuneError);
  EXPECT_THROW(load_objective(R"({"scenario": "step_80.json", "weights": {"itae": -1}})", dir),
               TuneError);
  EXPECT_THROW(load_objective(R"({"scenario": "step_80.json", "bounds": {"kp": [2, 1]}})", dir),
               TuneError);
  EXPECT_THROW(load_objective(R"({"scenario": "step_80.json", "bounds": {"kp": [-1, 1]}})", dir),
               TuneError);
  EXPECT_THROW(load_objective(R"({"scenario": "step_80.json", "seeds": [{"kp": 9}]})", dir),
               TuneError);
  EXPECT_THROW(load_objective(R"({"scenario": "step_80.json", "speed": 3})", dir), TuneError);
}

TEST(Objective, DefaultSeedIsDefaultGains) {
  const TuneObjective obj = load_objective(R"({"scenario": "step_80.json"})", scenario_path(""));
  ASSERT_EQ(obj.seeds.size(), 1u);
  EXPECT_EQ(obj.seeds[0].kp, PidGains{}.kp);
  EXPECT_EQ(obj.weights.overshoot, 50.0);
  EXPECT_EQ(obj.weights.collision_penalty, 1e6);
}
