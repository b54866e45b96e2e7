#include "debatelab/topic.hpp"

#include <array>

#include "debatelab/errors.hpp"

namespace debatelab {

namespace {

struct TopicNames {
  TopicKey key;
  std::string_view slug;
  std::string_view display;
};

constexpr std::array<TopicNames, 4> kTopics{{
    {TopicKey::GunViolence, "gun-violence", "gun violence"},
    {TopicKey::Racism, "racism", "racism"},
    {TopicKey::ClimateChange, "climate-change", "climate change"},
    {TopicKey::IllegalImmigration, "illegal-immigration", "illegal immigration"},
}};

}  // namespace

Topic make_topic(TopicKey key, const PromptTemplates& templates) {
  for (const auto& t : kTopics) {
    if (t.key != key) continue;
    Topic topic;
    topic.key = key;
    topic.slug = t.slug;
    topic.display_name = t.display;
    topic.survey_question = substitute(templates.survey_question, {{"topic", t.display}});
    topic.debate_framing = substitute(templates.debate_framing, {{"topic", t.display}});
    return topic;
  }
  throw ConfigError("unknown topic key");
}

std::span<const Topic> topic_registry() {
  static const std::array<Topic, 4> registry{
      make_topic(TopicKey::GunViolence, PromptTemplates::defaults()),
      make_topic(TopicKey::Racism, PromptTemplates::defaults()),
      make_topic(TopicKey::ClimateChange, PromptTemplates::defaults()),
      make_topic(TopicKey::IllegalImmigration, PromptTemplates::defaults()),
  };
  return registry;
}

const Topic& topic(TopicKey key) {
  for (const auto& t : topic_registry())
    if (t.key == key) return t;
  throw ConfigError("unknown topic key");
}

const Topic& topic_from_slug(std::string_view slug) {
  for (const auto& t : topic_registry())
    if (t.slug == slug) return t;
  throw ConfigError("unknown topic '" + std::string(slug) +
                    "' (expected gun-violence, racism, climate-change or illegal-immigration)");
}

}  // namespace debatelab
