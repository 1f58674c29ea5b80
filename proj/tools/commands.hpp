#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "cyflow/error.hpp"

namespace cyflow::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitFailure = 4;

/// 2 for bad input, 3 for numerical divergence, 4 for failed checks.
int exit_code_for(ErrorKind kind) noexcept;

json error_json(ErrorKind kind, const std::string& message);

const std::vector<std::string>& command_names();

/// <dir>/<command>-<hash of the resolved config>, created with a config echo.
std::filesystem::path prepare_run_dir(const RunConfig& cfg,
                                      std::string_view command,
                                      const std::filesystem::path& dir);

struct CommandOptions {
  bool verbose = false;
};

/// Runs one subcommand, writing its artifacts into `run_dir`. Outcomes that
/// map to a nonzero exit status are thrown as cyflow::Error after the
/// artifacts are written.
void run_command(std::string_view command, const RunConfig& cfg,
                 const std::filesystem::path& run_dir,
                 const CommandOptions& options);

}  // namespace cyflow::app
