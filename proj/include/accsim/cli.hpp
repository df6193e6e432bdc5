#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "accsim/report.hpp"

namespace accsim {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitCollision = 2,
  kExitTimeCeiling = 3,
};

namespace fs = std::filesystem;

// Each command writes only inside out_dir and reports problems on `err`.
int cmd_run(const fs::path& scenario_path, const fs::path& out_dir, std::ostream& err);
int cmd_compare(const fs::path& scenario_a, const fs::path& scenario_b, const fs::path& out_dir,
                std::ostream& err);
int cmd_stats(const fs::path& trace_path, std::optional<AnovaGrouping> anova,
              const fs::path& out_dir, std::ostream& err);
int cmd_tune(const fs::path& objective_path, std::size_t budget, const fs::path& out_dir,
             std::ostream& err);

/// Parses argv and dispatches. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace accsim
