#pragma once

#include <span>
#include <string>
#include <string_view>

#include "debatelab/templates.hpp"

namespace debatelab {

enum class TopicKey { GunViolence, Racism, ClimateChange, IllegalImmigration };

struct Topic {
  TopicKey key = TopicKey::ClimateChange;
  std::string slug;          // "climate-change"
  std::string display_name;  // "climate change"
  std::string survey_question;
  std::string debate_framing;
};

// The four debated topics, in registry order, rendered with default templates.
std::span<const Topic> topic_registry();

const Topic& topic(TopicKey key);
// Throws ConfigError for unknown slugs.
const Topic& topic_from_slug(std::string_view slug);

Topic make_topic(TopicKey key, const PromptTemplates& templates);

}  // namespace debatelab
