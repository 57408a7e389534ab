#pragma once

/// @file config.hpp
/// @brief JSON run configuration: per-command defaults, strict merging of
/// user files and `--set` overrides, and conversion into library structs.

#include <eqdisc/evolution.hpp>
#include <eqdisc/floquet_lab.hpp>
#include <eqdisc/pde_lab.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eqdisc::cli {

using json = nlohmann::json;

enum class Command { DiscoverPde, DiscoverFloquet, Validate, Sweep };

Command parse_command(const std::string& name);
std::string to_string(Command command);

/// Complete configuration with every key the command understands.
json default_config(Command command);

/// Recursively overlays `overlay` onto `base`. Keys absent from `base` are
/// an InputError naming the dotted path, as are type changes (integers and
/// reals are interchangeable; null defaults accept anything).
json merge_config(const json& base, const json& overlay);

/// Applies "a.b.c=value" to `config`. The value is parsed as JSON and falls
/// back to a plain string.
void apply_override(json& config, const std::string& assignment);

/// Reads a JSON file (InputError on I/O or syntax problems).
json read_json_file(const std::filesystem::path& path);

struct SelectorSpec {
    std::string mode = "parsimony"; ///< "parsimony" or "fitness"
    double tolerance = 0.1;

    std::size_t select(std::span<const DiscoveredModel> models) const;
};

EvolutionConfig evolution_config(const json& config);
SelectorSpec selector_spec(const json& config);
std::vector<double> lambda_grid(const json& config);

SyntheticSpec synthetic_spec(const json& config);
WorkspaceSpec workspace_spec(const json& config);
RodSpec rod_spec(const json& config);
CosFamily cos_family(const json& config);
std::pair<double, double> omega_range(const json& config);
ReplayOptions replay_options(const json& config);

/// Optional string entry at a dotted path (null or missing gives nullopt).
std::optional<std::string> optional_path(const json& config, const std::string& dotted);

} // namespace eqdisc::cli
