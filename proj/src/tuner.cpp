#include "accsim/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace accsim {

namespace {

using json = nlohmann::json;

constexpr std::array<const char*, 3> kGainNames = {"kp", "ki", "kd"};
// Bracket width, relative to the box side, at which a line search stops.
constexpr double kLineTolerance = 1e-4;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

double& gain_ref(PidGains& g, std::size_t i) {
  return i == 0 ? g.kp : (i == 1 ? g.ki : g.kd);
}

double gain_at(const PidGains& g, std::size_t i) {
  return i == 0 ? g.kp : (i == 1 ? g.ki : g.kd);
}

void check_keys(const json& node, const std::string& where, std::set<std::string> allowed) {
  if (!node.is_object()) throw TuneError(where + ": expected an object");
  for (const auto& [key, value] : node.items()) {
    if (!allowed.contains(key)) throw TuneError(where + "." + key + ": unknown key");
  }
}

double number_at(const json& node, const std::string& key, const std::string& where,
                 double fallback) {
  if (!node.contains(key)) return fallback;
  const json& v = node.at(key);
  if (!v.is_number()) throw TuneError(where + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw TuneError(where + "." + key + ": must be finite");
  return x;
}

Scenario scenario_at(const json& node, const std::string& key,
                     const std::filesystem::path& base_dir) {
  if (!node.at(key).is_string()) throw TuneError(key + ": expected a path string");
  const std::filesystem::path p = base_dir / node.at(key).get<std::string>();
  try {
    return load_scenario_file(p);
  } catch (const ScenarioError& e) {
    throw TuneError(key + ": " + e.what());
  }
}

bool within(const PidGains& g, const GainBox& box) {
  for (std::size_t i = 0; i < 3; ++i) {
    const double x = gain_at(g, i);
    if (!(x >= box[i].lo && x <= box[i].hi)) return false;
  }
  return true;
}

// Counts evaluations against the budget and remembers the best point.
class Evaluator {
 public:
  Evaluator(const CostFunction& cost, std::size_t budget, TuneResult& result)
      : cost_(cost), budget_(budget), result_(result) {}

  std::optional<double> operator()(const PidGains& g, const char* phase) {
    if (result_.history.size() >= budget_) return std::nullopt;
    const double c = cost_(g);
    result_.history.push_back({phase, g, c});
    if (result_.history.size() == 1 || c < result_.best_cost) {
      result_.best = g;
      result_.best_cost = c;
    }
    return c;
  }

 private:
  const CostFunction& cost_;
  std::size_t budget_;
  TuneResult& result_;
};

// Golden-section search along one gain; false once the budget is spent.
bool line_search(Evaluator& eval, PidGains base, std::size_t axis, const GainBounds& b) {
  double lo = b.lo;
  double hi = b.hi;
  if (hi <= lo) return true;
  const double tol = kLineTolerance * (hi - lo);
  auto at = [&](double x) {
    gain_ref(base, axis) = x;
    return eval(base, "descent");
  };
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  auto f1 = at(x1);
  if (!f1) return false;
  auto f2 = at(x2);
  if (!f2) return false;
  while (hi - lo > tol) {
    if (*f1 <= *f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = at(x1);
      if (!f1) return false;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = at(x2);
      if (!f2) return false;
    }
  }
  return true;
}

}  // namespace

TuneObjective load_objective(const std::string& document, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(document);
  } catch (const json::parse_error& e) {
    throw TuneError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "objective", {"scenario", "follow_scenario", "weights", "bounds", "seeds"});
  if (!root.contains("scenario")) throw TuneError("scenario: required key is missing");

  TuneObjective obj;
  obj.scenario = scenario_at(root, "scenario", base_dir);
  if (root.contains("follow_scenario") && !root.at("follow_scenario").is_null()) {
    obj.follow_scenario = scenario_at(root, "follow_scenario", base_dir);
  }

  if (root.contains("weights")) {
    const json& w = root.at("weights");
    check_keys(w, "weights", {"itae", "overshoot", "collision_penalty"});
    obj.weights.itae = number_at(w, "itae", "weights", obj.weights.itae);
    obj.weights.overshoot = number_at(w, "overshoot", "weights", obj.weights.overshoot);
    obj.weights.collision_penalty =
        number_at(w, "collision_penalty", "weights", obj.weights.collision_penalty);
  }
  const TuneWeights& w = obj.weights;
  if (w.itae < 0.0 || w.overshoot < 0.0 || w.collision_penalty < 0.0) {
    throw TuneError("weights: every weight must be >= 0");
  }
  if (w.itae == 0.0 && w.overshoot == 0.0 && w.collision_penalty == 0.0) {
    throw TuneError("weights: at least one weight must be > 0");
  }

  if (root.contains("bounds")) {
    const json& b = root.at("bounds");
    check_keys(b, "bounds", {"kp", "ki", "kd"});
    for (std::size_t i = 0; i < 3; ++i) {
      const std::string name = kGainNames[i];
      if (!b.contains(name)) continue;
      const json& pair = b.at(name);
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        throw TuneError("bounds." + name + ": expected [lo, hi]");
      }
      obj.bounds[i] = {pair[0].get<double>(), pair[1].get<double>()};
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const GainBounds& b = obj.bounds[i];
    if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo < 0.0 || b.lo > b.hi) {
      throw TuneError(fmt::format("bounds.{}: need 0 <= lo <= hi, got [{}, {}]", kGainNames[i],
                                  b.lo, b.hi));
    }
  }

  if (root.contains("seeds")) {
    const json& seeds = root.at("seeds");
    if (!seeds.is_array()) throw TuneError("seeds: expected an array");
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const std::string where = fmt::format("seeds[{}]", k);
      check_keys(seeds[k], where, {"kp", "ki", "kd"});
      PidGains g;
      g.kp = number_at(seeds[k], "kp", where, g.kp);
      g.ki = number_at(seeds[k], "ki", where, g.ki);
      g.kd = number_at(seeds[k], "kd", where, g.kd);
      if (!within(g, obj.bounds)) throw TuneError(where + ": outside the gain bounds");
      obj.seeds.push_back(g);
    }
  } else if (within(PidGains{}, obj.bounds)) {
    obj.seeds.push_back(PidGains{});
  }
  return obj;
}

TuneObjective load_objective_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TuneError(path.string() + ": cannot open objective file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return load_objective(buffer.str(), path.parent_path());
  } catch (const TuneError& e) {
    throw TuneError(path.string() + ": " + e.what());
  }
}

CostBreakdown cost_from_trace(const TraceLog& trace, const Scenario& scenario,
                              const TuneWeights& weights) {
  std::set<std::string> acc_ids;
  for (const VehicleSpec& v : scenario.vehicles) {
    if (v.role == VehicleRole::AccControlled) acc_ids.insert(v.id);
  }
  CostBreakdown c;
  double peak = 0.0;
  for (const TraceRow& r : trace.rows) {
    if (!acc_ids.contains(r.vehicle_id)) continue;
    c.itae += r.time_s * std::abs(r.target_speed_kmh - r.speed_kmh) * trace.dt_s;
    peak = std::max(peak, r.speed_kmh);
  }
  c.overshoot = std::max(0.0, peak - scenario.cruise_target_kmh) / scenario.cruise_target_kmh;
  c.collision = trace.status == RunStatus::Collision;
  c.total = weights.itae * c.itae + weights.overshoot * c.overshoot +
            (c.collision ? weights.collision_penalty : 0.0);
  return c;
}

CostBreakdown evaluate_breakdown(const PidGains& gains, const Scenario& scenario,
                                 const TuneWeights& weights) {
  Scenario s = scenario;
  s.controller.gains = gains;
  return cost_from_trace(run_simulation(s), s, weights);
}

double evaluate_gains(const PidGains& gains, const TuneObjective& objective) {
  if (!within(gains, objective.bounds)) {
    throw std::invalid_argument(fmt::format("gains ({}, {}, {}) lie outside the tuning bounds",
                                            gains.kp, gains.ki, gains.kd));
  }
  double total = evaluate_breakdown(gains, objective.scenario, objective.weights).total;
  if (objective.follow_scenario) {
    total += evaluate_breakdown(gains, *objective.follow_scenario, objective.weights).total;
  }
  return total;
}

TuneResult tune(const CostFunction& cost, const GainBox& bounds, std::size_t budget,
                const std::vector<PidGains>& seeds) {
  if (budget < kGridPoints) {
    throw TuneError(fmt::format("budget {} is below the minimum of {} (the 3x3x3 starting grid)",
                                budget, kGridPoints));
  }
  TuneResult result;
  Evaluator eval(cost, budget, result);

  auto level = [&](std::size_t axis, int k) {
    const GainBounds& b = bounds[axis];
    return k == 0 ? b.lo : (k == 1 ? 0.5 * (b.lo + b.hi) : b.hi);
  };
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        eval(PidGains{level(0, i), level(1, j), level(2, k)}, "grid");
      }
    }
  }
  for (const PidGains& s : seeds) {
    if (!eval(s, "seed")) return result;
  }

  for (;;) {
    const double before = result.best_cost;
    for (std::size_t axis = 0; axis < 3; ++axis) {
      if (!line_search(eval, result.best, axis, bounds[axis])) return result;
    }
    if (!(result.best_cost < before)) break;
  }
  return result;
}

TuneResult tune(const TuneObjective& objective, std::size_t budget) {
  return tune([&](const PidGains& g) { return evaluate_gains(g, objective); }, objective.bounds,
              budget, objective.seeds);
}

nlohmann::ordered_json tuned_gains_json(const TuneResult& result, std::size_t budget) {
  nlohmann::ordered_json j;
  j["kp"] = result.best.kp;
  j["ki"] = result.best.ki;
  j["kd"] = result.best.kd;
  j["cost"] = result.best_cost;
  j["evaluations"] = result.history.size();
  j["budget"] = budget;
  return j;
}

std::string history_csv(const TuneResult& result) {
  std::ostringstream out;
  out << "evaluation,phase,kp,ki,kd,cost\n";
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const Evaluation& e = result.history[i];
    out << fmt::format("{},{},{},{},{},{}\n", i, e.phase, e.gains.kp, e.gains.ki, e.gains.kd,
                       e.cost);
  }
  return out.str();
}

}  // namespace accsim
