#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "debatelab/gateway.hpp"
#include "debatelab/persona.hpp"
#include "debatelab/templates.hpp"
#include "debatelab/topic.hpp"
#include "debatelab/transcript.hpp"

namespace debatelab {

inline constexpr int kDefaultReplyMaxTokens = 120;
inline constexpr int kDefaultSurveyMaxTokens = 16;

GenerationParams default_reply_params();
GenerationParams default_survey_params();

struct Participant {
  Persona persona;
  // Aggregation key: "Republican", "Democrat", "Default", or
  // "Republican 1"/"Republican 2" when two share a party.
  std::string role;
};

struct DebateConfig {
  std::string debate_id;
  Topic topic;
  std::vector<Participant> participants;
  int cycles = 3;
  GenerationParams reply_params = default_reply_params();
  GenerationParams survey_params = default_survey_params();
  std::uint64_t rng_seed = 0;
  PromptTemplates templates = PromptTemplates::defaults();

  // 2 or 3 participants with distinct ids and names, cycles > 0.
  void validate() const;

  // Opening speaker, uniform over participants given rng_seed.
  std::size_t start_index() const;

  // Participant index speaking at 1-based `iteration`.
  std::size_t speaker_at(int iteration) const;
};

struct SurveyRecord {
  std::string persona_id;
  std::string role;
  int checkpoint_iteration = 0;
  std::string raw_response;
  std::optional<double> score;  // nullopt marks an unparsed answer
  int attempts = 1;

  bool operator==(const SurveyRecord&) const = default;
};

struct DebateResult {
  Transcript transcript;
  std::vector<SurveyRecord> surveys;

  int unparsed_surveys() const;
};

// Background story, framing, "Name: utterance" history, then "{speaker}:".
std::string assemble_reply_prompt(const Persona& persona, const Topic& topic,
                                  const Transcript& transcript,
                                  const PromptTemplates& templates = PromptTemplates::defaults());

// "\nName:" for every participant, so the model never speaks for others.
std::vector<std::string> reply_stop_sequences(const std::vector<Participant>& participants);

// Surveys everyone at iteration 0 and after each round-robin cycle.
// Throws GenerationFailed if a reply is empty twice; transport errors propagate.
DebateResult run_debate(const DebateConfig& config, Gateway& gateway, RequestLog* log = nullptr);

}  // namespace debatelab
