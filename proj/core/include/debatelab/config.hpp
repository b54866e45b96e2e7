#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "debatelab/gateway.hpp"
#include "debatelab/runner.hpp"
#include "debatelab/scripted.hpp"

namespace debatelab {

inline constexpr int kSchemaVersion = 1;

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

EnvLookup process_env();

// Expands ${VAR} and ${VAR:-fallback}. Throws ConfigError for an unset
// variable without fallback.
std::string interpolate_env(std::string_view text, const EnvLookup& env = process_env());

// Parses a JSON config file (comments allowed), interpolates environment
// variables in every string value and checks schema_version.
nlohmann::json load_config_file(const std::filesystem::path& path,
                                const EnvLookup& env = process_env(), bool require_schema = true);

void interpolate_env_in_place(nlohmann::json& j, const EnvLookup& env = process_env());

std::shared_ptr<const ScriptedProgram> scripted_program_from_json(const nlohmann::json& j);

// Relative paths (script_file) resolve against `base_dir`.
BackendSpec backend_spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
BackendSpec load_backend_spec(const std::filesystem::path& path);

// Loads rosters and templates referenced by the spec relative to `base_dir`.
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

}  // namespace debatelab
