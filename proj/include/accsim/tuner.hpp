#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "accsim/controller.hpp"
#include "accsim/engine.hpp"
#include "accsim/scenario.hpp"

namespace accsim {

/// Invalid objective file or tuner arguments.
class TuneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GainBounds {
  double lo = 0.0;
  double hi = 0.0;
};

/// kp, ki, kd in that order.
using GainBox = std::array<GainBounds, 3>;

struct TuneWeights {
  double itae = 1.0;
  double overshoot = 50.0;
  double collision_penalty = 1e6;
};

struct TuneObjective {
  TuneWeights weights;
  Scenario scenario;
  std::optional<Scenario> follow_scenario;
  GainBox bounds{GainBounds{0.0, 3.0}, GainBounds{0.0, 1.0}, GainBounds{0.0, 0.5}};
  std::vector<PidGains> seeds;  // evaluated after the grid
};

/// Parses an objective document. Scenario paths are resolved against
/// `base_dir`.
TuneObjective load_objective(const std::string& document, const std::filesystem::path& base_dir);
TuneObjective load_objective_file(const std::filesystem::path& path);

struct CostBreakdown {
  double itae = 0.0;            // sum of t*|target - speed|*dt over ACC rows, km/h*s^2
  double overshoot = 0.0;       // max(0, peak speed - cruise target) / cruise target
  bool collision = false;
  double total = 0.0;
};

CostBreakdown cost_from_trace(const TraceLog& trace, const Scenario& scenario,
                              const TuneWeights& weights);

/// Runs the objective's scenarios with `gains` and sums their costs.
double evaluate_gains(const PidGains& gains, const TuneObjective& objective);
CostBreakdown evaluate_breakdown(const PidGains& gains, const Scenario& scenario,
                                 const TuneWeights& weights);

inline constexpr std::size_t kGridPoints = 27;

struct Evaluation {
  std::string phase;  // grid, seed or descent
  PidGains gains;
  double cost = 0.0;
};

struct TuneResult {
  PidGains best;
  double best_cost = 0.0;
  std::vector<Evaluation> history;
};

using CostFunction = std::function<double(const PidGains&)>;

/// 3x3x3 grid over the box, then the seeds, then coordinate descent with a
/// golden-section line search per gain, starting from the best point so
/// far. Stops when a full sweep makes no progress or the budget runs out.
TuneResult tune(const CostFunction& cost, const GainBox& bounds, std::size_t budget,
                const std::vector<PidGains>& seeds = {});

TuneResult tune(const TuneObjective& objective, std::size_t budget);

nlohmann::ordered_json tuned_gains_json(const TuneResult& result, std::size_t budget);
std::string history_csv(const TuneResult& result);

}  // namespace accsim
