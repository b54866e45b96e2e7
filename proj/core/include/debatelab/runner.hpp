#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "debatelab/debate.hpp"
#include "debatelab/gateway.hpp"
#include "debatelab/persona.hpp"
#include "debatelab/run_store.hpp"
#include "debatelab/topic.hpp"

namespace debatelab {

enum class Family { ThreeWayCross, TwoWayCross, EchoChamberWithDefault, EchoChamberWithoutDefault };

std::string_view to_string(Family family);
std::optional<Family> family_from_string(std::string_view name);
bool is_echo_chamber(Family family);

struct ExperimentSpec {
  Family family = Family::ThreeWayCross;
  std::optional<Party> echo_party;
  Topic topic;
  int repetitions = 40;
  int cycles = 3;
  std::uint64_t base_seed = 0;
  std::vector<Persona> republicans;
  std::vector<Persona> democrats;
  std::string republican_roster;  // source paths, recorded in the manifest
  std::string democrat_roster;
  std::string default_name = std::string(kDefaultPersonaName);
  GenerationParams reply_params = default_reply_params();
  GenerationParams survey_params = default_survey_params();
  PromptTemplates templates = PromptTemplates::defaults();
};

// One config per repetition; rep r uses rng_seed = base_seed + r and roster
// index r (cross families) or indices (2r, 2r+1) of the echo party's roster.
// Throws RosterExhausted when a roster is too short.
std::vector<DebateConfig> plan_runs(const ExperimentSpec& spec);

std::string run_dir_name(int index);

struct RunRef {
  int index = 0;
  std::string dir;
  RunStatus status = RunStatus::Failed;
  std::string error;
  int unparsed_surveys = 0;
};

struct DataQuality {
  int unparsed_surveys = 0;
  int failed_runs = 0;
};

struct Campaign {
  ExperimentSpec spec;
  std::filesystem::path root;
  std::string backend_kind;
  std::string backend_model;
  std::vector<RunRef> runs;
  DataQuality data_quality;

  int completed_runs() const;
};

struct ExecuteOptions {
  int parallelism = 1;
  // Reruns directories whose status is failed; off by default.
  bool rerun_failed = false;
};

// Runs the plan into `root`, skipping run directories already completed
// there, and writes campaign.json. Per-run failures are recorded, not thrown.
Campaign execute(const ExperimentSpec& spec, const std::vector<DebateConfig>& plan,
                 Gateway& gateway, const std::filesystem::path& root,
                 const ExecuteOptions& options = {});

nlohmann::ordered_json manifest_json(const Campaign& campaign);

// Reads campaign.json; the spec is restored without persona rosters.
Campaign load_campaign(const std::filesystem::path& root);

}  // namespace debatelab
