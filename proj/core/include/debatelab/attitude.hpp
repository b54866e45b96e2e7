#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "debatelab/persona.hpp"
#include "debatelab/templates.hpp"
#include "debatelab/topic.hpp"
#include "debatelab/transcript.hpp"

namespace debatelab {

inline constexpr double kScaleMin = 0.0;
inline constexpr double kScaleMax = 10.0;

// Background story, debate framing and the conversation so far, followed by
// the survey question. Earlier survey questions and answers are never part
// of it. `retry` appends the stricter single-number instruction.
std::string build_survey_prompt(const Persona& persona, const Topic& topic,
                                const Transcript& history = {}, bool retry = false,
                                const PromptTemplates& templates = PromptTemplates::defaults());

// First number in [0, 10] written as an integer or with one decimal.
// Out-of-range numbers are skipped, never clamped.
std::optional<double> parse_rating(std::string_view raw);

}  // namespace debatelab
