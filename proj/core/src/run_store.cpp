#include "debatelab/run_store.hpp"

#include <fstream>
#include <sstream>

#include "debatelab/errors.hpp"

namespace debatelab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

std::string_view to_string(RunStatus status) {
  return status == RunStatus::Completed ? "completed" : "failed";
}

ordered_json to_json(const GenerationParams& p) {
  ordered_json j;
  j["temperature"] = p.temperature;
  j["max_tokens"] = p.max_tokens;
  j["stop"] = p.stop_sequences;
  j["seed"] = p.seed ? ordered_json(*p.seed) : ordered_json(nullptr);
  return j;
}

GenerationParams generation_params_from_json(const json& j, GenerationParams p) {
  if (!j.is_object()) throw ConfigError("generation params must be an object");
  if (j.contains("temperature")) p.temperature = j["temperature"].get<double>();
  if (j.contains("max_tokens")) p.max_tokens = j["max_tokens"].get<int>();
  if (j.contains("stop")) p.stop_sequences = j["stop"].get<std::vector<std::string>>();
  if (j.contains("seed") && !j["seed"].is_null()) p.seed = j["seed"].get<std::int64_t>();
  p.validate();
  return p;
}

ordered_json to_json(const DebateConfig& c) {
  ordered_json j;
  j["schema_version"] = 1;
  j["debate_id"] = c.debate_id;
  j["topic"] = c.topic.slug;
  j["debate_framing"] = c.topic.debate_framing;
  j["survey_question"] = c.topic.survey_question;
  ordered_json parts = ordered_json::array();
  for (const auto& p : c.participants) {
    ordered_json pj;
    pj["id"] = p.persona.id;
    pj["name"] = p.persona.name;
    pj["party"] = to_string(p.persona.party);
    pj["role"] = p.role;
    pj["background_story"] = p.persona.background_story;
    parts.push_back(std::move(pj));
  }
  j["participants"] = std::move(parts);
  j["cycles"] = c.cycles;
  j["rng_seed"] = c.rng_seed;
  j["start_index"] = c.start_index();
  j["reply_params"] = to_json(c.reply_params);
  j["survey_params"] = to_json(c.survey_params);
  return j;
}

ordered_json to_json(const SurveyRecord& r) {
  ordered_json j;
  j["persona_id"] = r.persona_id;
  j["role"] = r.role;
  j["checkpoint_iteration"] = r.checkpoint_iteration;
  j["raw_response"] = r.raw_response;
  j["score"] = r.score ? ordered_json(*r.score) : ordered_json(nullptr);
  j["attempts"] = r.attempts;
  return j;
}

SurveyRecord survey_record_from_json(const json& j) {
  SurveyRecord r;
  r.persona_id = j.at("persona_id").get<std::string>();
  r.role = j.at("role").get<std::string>();
  r.checkpoint_iteration = j.at("checkpoint_iteration").get<int>();
  r.raw_response = j.at("raw_response").get<std::string>();
  if (!j.at("score").is_null()) r.score = j["score"].get<double>();
  r.attempts = j.value("attempts", 1);
  return r;
}

void write_file_atomic(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace

void write_run_dir(const fs::path& dir, const DebateConfig& config, const RunOutcome& outcome,
                   const std::vector<std::string>& request_log) {
  const fs::path tmp = dir.string() + ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  write_text(tmp / "config.json", to_json(config).dump(2) + "\n");

  std::string requests;
  for (const auto& line : request_log) requests += line + "\n";
  write_text(tmp / "requests.jsonl", requests);

  int unparsed = 0;
  if (outcome.status == RunStatus::Completed && outcome.result) {
    std::string transcript;
    for (const auto& e : outcome.result->transcript.entries) {
      ordered_json j;
      j["iteration"] = e.iteration;
      j["persona_id"] = e.persona_id;
      j["speaker"] = e.speaker;
      j["utterance"] = e.utterance;
      transcript += j.dump() + "\n";
    }
    write_text(tmp / "transcript.jsonl", transcript);

    std::string surveys;
    for (const auto& s : outcome.result->surveys) surveys += to_json(s).dump() + "\n";
    write_text(tmp / "surveys.jsonl", surveys);
    unparsed = outcome.result->unparsed_surveys();
  }

  ordered_json status;
  status["status"] = to_string(outcome.status);
  status["error"] = outcome.error;
  status["unparsed_surveys"] = unparsed;
  write_text(tmp / "status.json", status.dump(2) + "\n");

  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

std::vector<SurveyRecord> read_surveys(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read " + file.string());
  std::vector<SurveyRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(survey_record_from_json(json::parse(line)));
  }
  return out;
}

Transcript read_transcript(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read " + file.string());
  Transcript t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    t.entries.push_back({j.at("iteration").get<int>(), j.at("persona_id").get<std::string>(),
                         j.at("speaker").get<std::string>(), j.at("utterance").get<std::string>()});
  }
  return t;
}

std::optional<StoredRun> read_run_dir(const fs::path& dir) {
  const auto status_path = dir / "status.json";
  if (!fs::exists(status_path)) return std::nullopt;
  const auto status = json::parse(read_file(status_path));
  StoredRun run;
  run.status = status.at("status").get<std::string>() == "completed" ? RunStatus::Completed
                                                                      : RunStatus::Failed;
  run.error = status.value("error", std::string());
  if (run.status == RunStatus::Completed) run.surveys = read_surveys(dir / "surveys.jsonl");
  return run;
}

}  // namespace debatelab
