#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chainscope/config.hpp"

namespace chainscope {

enum ExitCode { kExitOk = 0, kExitError = 1, kExitInconclusive = 2, kExitVerifyFailed = 3 };

struct CommandOutput {
  int exit_code = kExitOk;
  // Empty on configuration or resource errors.
  nlohmann::json report;
  // (file name, contents) pairs referenced from the report.
  std::vector<std::pair<std::string, std::string>> sidecars;
  std::string error;
  // Deterministic work counter (grid cells handled), also echoed in the report.
  std::size_t work = 0;
};

std::vector<std::string> command_names();

/// Runs one command. `sidecar_stem` is the file-name prefix for CSV
/// sidecars; without it none are produced.
CommandOutput run_command(const std::string& command, const RunConfig& cfg,
                          const std::optional<std::string>& sidecar_stem = std::nullopt);

}  // namespace chainscope
