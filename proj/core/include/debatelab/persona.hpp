#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debatelab/gateway.hpp"
#include "debatelab/templates.hpp"
#include "debatelab/topic.hpp"

namespace debatelab {

enum class Party { Republican, Democrat, Default };

std::string_view to_string(Party party);
// Case-insensitive; accepts "republican", "Democrat", "default".
std::optional<Party> party_from_string(std::string_view name);
Party opposing(Party party);

enum class Severity { MajorProblem, MinorOrNoProblem };

struct TopicStance {
  TopicKey topic = TopicKey::ClimateChange;
  Severity severity = Severity::MajorProblem;
};

struct Persona {
  std::string id;
  std::string name;
  Party party = Party::Default;
  std::string background_story;

  bool operator==(const Persona&) const = default;
};

inline constexpr std::string_view kDefaultDirective = "You are an American.";
inline constexpr std::string_view kDefaultPersonaName = "Dominik";
inline constexpr int kMaxStoryWords = 200;

// Polarized positions: Democrats treat gun violence, racism and climate
// change as major problems and illegal immigration as minor; Republicans
// the reverse.
std::vector<TopicStance> partisan_stances(Party party);

// Throws MissingStance unless every registry topic has a stance, and
// ConfigError for Party::Default.
std::string build_meta_prompt(Party party, std::span<const TopicStance> stances,
                              std::string_view name,
                              const PromptTemplates& templates = PromptTemplates::defaults());

// Empty string when the story passes, otherwise the reason it failed.
std::string validate_story(std::string_view story, Party party);

std::size_t word_count(std::string_view text);

// 100 common given names, without kDefaultPersonaName.
std::span<const std::string_view> bundled_name_pool();

// Republicans draw names from the front of the pool, Democrats from the middle,
// so two 40-persona rosters never share a name.
std::size_t default_name_offset(Party party, std::size_t pool_size);

struct RosterOptions {
  std::size_t name_offset = 0;
  int max_tokens = 400;
  int parallelism = 1;
  std::optional<std::int64_t> seed;
  const PromptTemplates* templates = nullptr;
  RequestLog* log = nullptr;
};

// Persona ids are "{party}-{slot:03}". Results are ordered by slot.
std::vector<Persona> generate_roster(Party party, int count, Gateway& gateway,
                                     std::span<const std::string> name_pool,
                                     const RosterOptions& options = {});

// Fresh process-unique id on every call.
Persona default_persona();
Persona default_persona(std::string id, std::string name = std::string(kDefaultPersonaName));

void write_roster(const std::filesystem::path& path, std::span<const Persona> roster);
std::vector<Persona> read_roster(const std::filesystem::path& path);

}  // namespace debatelab
