#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "debatelab/debate.hpp"

namespace debatelab {

enum class RunStatus { Completed, Failed };

std::string_view to_string(RunStatus status);

struct RunOutcome {
  RunStatus status = RunStatus::Completed;
  std::string error;
  std::optional<DebateResult> result;
};

nlohmann::ordered_json to_json(const GenerationParams& params);
GenerationParams generation_params_from_json(const nlohmann::json& j, GenerationParams fallback);

nlohmann::ordered_json to_json(const DebateConfig& config);
nlohmann::ordered_json to_json(const SurveyRecord& record);
SurveyRecord survey_record_from_json(const nlohmann::json& j);

// Writes config.json, transcript.jsonl, surveys.jsonl, requests.jsonl and
// status.json into `<dir>.tmp`, then renames it to `dir`.
void write_run_dir(const std::filesystem::path& dir, const DebateConfig& config,
                   const RunOutcome& outcome, const std::vector<std::string>& request_log);

struct StoredRun {
  RunStatus status = RunStatus::Failed;
  std::string error;
  std::vector<SurveyRecord> surveys;
};

// nullopt when the directory or its status.json is missing.
std::optional<StoredRun> read_run_dir(const std::filesystem::path& dir);
std::vector<SurveyRecord> read_surveys(const std::filesystem::path& file);
Transcript read_transcript(const std::filesystem::path& file);

// Writes `text` to `path` through a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
std::string read_file(const std::filesystem::path& path);

}  // namespace debatelab
