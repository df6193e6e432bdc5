#include "accsim/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "accsim/trace_io.hpp"
#include "accsim/tuner.hpp"

namespace accsim {

namespace {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  out << content;
  if (!out) throw InputError(path.string() + ": write failed");
}

void prepare_out_dir(const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw InputError(out_dir.string() + ": cannot create output directory");
  }
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw InputError(path.string() + ": no such file");
}

int exit_for(RunStatus status) {
  switch (status) {
    case RunStatus::Completed:
      return kExitOk;
    case RunStatus::Collision:
      return kExitCollision;
    case RunStatus::TimeCeiling:
      return kExitTimeCeiling;
  }
  return kExitInputError;
}

void report_status(const std::string& label, const TraceLog& trace, std::ostream& err) {
  if (trace.status == RunStatus::Collision) {
    for (const CollisionEvent& c : trace.collisions) {
      err << fmt::format("{}: collision at t={} s between \"{}\" and \"{}\" (gap {} m)\n", label,
                         format_6g(c.time_s), c.leader_id, c.follower_id, format_6g(c.gap_m));
    }
  } else if (trace.status == RunStatus::TimeCeiling) {
    err << fmt::format("{}: time ceiling reached after {} ticks\n", label, trace.ticks);
  }
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
}

std::string with_newline(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

int cmd_run(const fs::path& scenario_path, const fs::path& out_dir, std::ostream& err) {
  return guarded(err, [&] {
    require_file(scenario_path);
    const Scenario scenario = load_scenario_file(scenario_path);
    const TraceLog trace = run_simulation(scenario);
    prepare_out_dir(out_dir);
    write_file(out_dir / "trace.csv", trace_to_csv(trace));
    write_file(out_dir / "summary.json", with_newline(run_summary_json(scenario, trace)));
    report_status(scenario_path.string(), trace, err);
    return exit_for(trace.status);
  });
}

int cmd_compare(const fs::path& scenario_a, const fs::path& scenario_b, const fs::path& out_dir,
                std::ostream& err) {
  return guarded(err, [&] {
    require_file(scenario_a);
    require_file(scenario_b);
    const Scenario sa = load_scenario_file(scenario_a);
    const Scenario sb = load_scenario_file(scenario_b);
    std::string label_a = scenario_a.stem().string();
    std::string label_b = scenario_b.stem().string();
    if (label_a == label_b) {
      label_a += "_a";
      label_b += "_b";
    }
    const TraceLog ta = run_simulation(sa);
    const TraceLog tb = run_simulation(sb);
    const ComparisonReport report = compare_runs(ta, tb, label_a, label_b);

    prepare_out_dir(out_dir);
    write_file(out_dir / "report.json", with_newline(to_json(report)));
    write_file(out_dir / "report.txt", to_text(report));
    const std::pair<const std::string&, const TraceLog&> runs[] = {{label_a, ta}, {label_b, tb}};
    const RunAnalysis* analyses[] = {&report.run_a, &report.run_b};
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& [label, trace] = runs[i];
      write_file(out_dir / ("trace_" + label + ".csv"), trace_to_csv(trace));
      write_file(out_dir / ("speeds_" + label + ".csv"), speeds_csv(trace));
      write_file(out_dir / ("spacing_" + label + ".csv"), spacing_csv(analyses[i]->spacing));
      write_file(out_dir / ("spacing_" + label + ".svg"),
                 spacing_svg(analyses[i]->spacing, "Spacing, " + label));
    }
    report_status(label_a, ta, err);
    report_status(label_b, tb, err);
    if (ta.status == RunStatus::Collision || tb.status == RunStatus::Collision) {
      return static_cast<int>(kExitCollision);
    }
    if (ta.status == RunStatus::TimeCeiling || tb.status == RunStatus::TimeCeiling) {
      return static_cast<int>(kExitTimeCeiling);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_stats(const fs::path& trace_path, std::optional<AnovaGrouping> anova,
              const fs::path& out_dir, std::ostream& err) {
  return guarded(err, [&] {
    require_file(trace_path);
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) throw InputError(trace_path.string() + ": cannot open trace");
    TraceLog trace;
    try {
      trace = read_trace_csv(in);
    } catch (const TraceParseError& e) {
      throw InputError(trace_path.string() + ": " + e.what());
    }
    const StatsReport stats = compute_stats(trace, anova);
    prepare_out_dir(out_dir);
    write_file(out_dir / "stats.json", with_newline(to_json(stats)));
    write_file(out_dir / "stats.txt", to_text(stats));
    return static_cast<int>(kExitOk);
  });
}

int cmd_tune(const fs::path& objective_path, std::size_t budget, const fs::path& out_dir,
             std::ostream& err) {
  return guarded(err, [&] {
    require_file(objective_path);
    const TuneObjective objective = load_objective_file(objective_path);
    const TuneResult result = tune(objective, budget);
    prepare_out_dir(out_dir);
    write_file(out_dir / "tuned_gains.json", with_newline(tuned_gains_json(result, budget)));
    write_file(out_dir / "tune_history.csv", history_csv(result));
    return static_cast<int>(kExitOk);
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive cruise control simulator"};
  app.require_subcommand(1);

  std::string out_dir;
  std::string scenario;
  std::string scenario_a;
  std::string scenario_b;
  std::string trace_path;
  std::string anova;
  std::string objective;
  std::size_t budget = 200;

  auto* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("scenario", scenario, "Scenario JSON")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* compare = app.add_subcommand("compare", "Simulate two scenarios and compare them");
  compare->add_option("scenario_a", scenario_a, "Baseline scenario JSON")->required();
  compare->add_option("scenario_b", scenario_b, "Comparison scenario JSON")->required();
  compare->add_option("--out", out_dir, "Output directory")->required();

  auto* stats = app.add_subcommand("stats", "Speed summaries and ANOVA for a trace CSV");
  stats->add_option("trace", trace_path, "Trace CSV")->required();
  stats->add_option("--anova", anova, "ANOVA grouping")
      ->check(CLI::IsMember({"speed", "spacing"}));
  stats->add_option("--out", out_dir, "Output directory")->required();

  auto* tune_cmd = app.add_subcommand("tune", "Tune PID gains against an objective");
  tune_cmd->add_option("objective", objective, "Objective JSON")->required();
  tune_cmd->add_option("--budget", budget, "Maximum number of evaluations");
  tune_cmd->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  if (*run) return cmd_run(scenario, out_dir, err);
  if (*compare) return cmd_compare(scenario_a, scenario_b, out_dir, err);
  if (*stats) {
    std::optional<AnovaGrouping> grouping;
    if (anova == "speed") grouping = AnovaGrouping::Speed;
    if (anova == "spacing") grouping = AnovaGrouping::Spacing;
    return cmd_stats(trace_path, grouping, out_dir, err);
  }
  return cmd_tune(objective, budget, out_dir, err);
}

}  // namespace accsim
