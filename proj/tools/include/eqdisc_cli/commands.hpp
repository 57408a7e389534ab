#pragma once

/// @file commands.hpp
/// @brief The four batch commands. Each one writes its files under `out`
/// (created when missing), writes `out/report.json` and returns the report
/// together with the process exit code it implies.

#include "eqdisc_cli/config.hpp"

#include <json.hpp>

#include <exception>
#include <filesystem>

namespace eqdisc::cli {

using json = nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitDegenerate = 4;
inline constexpr int kExitInternal = 1;

struct CommandResult {
    json report;
    int exit_code = kExitOk;
};

/// `config` must already be merged onto default_config(command).
CommandResult run_command(Command command, const json& config, const std::filesystem::path& out);

CommandResult cmd_discover_pde(const json& config, const std::filesystem::path& out);
CommandResult cmd_discover_floquet(const json& config, const std::filesystem::path& out);
/// Replays the model of `validate.report` against its reference field.
CommandResult cmd_validate(const json& config, const std::filesystem::path& out);
/// Floquet: n runs per npts value. PDE: the lambda table of n seeds.
CommandResult cmd_sweep(const json& config, const std::filesystem::path& out);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& error) noexcept;

} // namespace eqdisc::cli
