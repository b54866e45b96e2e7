#include "debatelab/attitude.hpp"

#include <cctype>
#include <charconv>

namespace debatelab {

std::string render_history(const Transcript& transcript) {
  std::string out;
  for (const auto& e : transcript.entries) {
    if (!out.empty()) out += '\n';
    out += e.speaker;
    out += ": ";
    out += e.utterance;
  }
  return out;
}

std::string build_survey_prompt(const Persona& persona, const Topic& topic,
                                const Transcript& history, bool retry,
                                const PromptTemplates& templates) {
  std::string prompt = persona.background_story;
  prompt += "\n\n";
  prompt += substitute(templates.debate_framing, {{"topic", topic.display_name}});
  if (!history.empty()) {
    prompt += "\n\n";
    prompt += render_history(history);
  }
  prompt += "\n\n";
  prompt += substitute(templates.survey_question, {{"topic", topic.display_name}});
  if (retry) {
    prompt += ' ';
    prompt += templates.survey_retry;
  }
  prompt += '\n';
  prompt += persona.name;
  prompt += ':';
  return prompt;
}

std::optional<double> parse_rating(std::string_view raw) {
  const auto digit = [&](std::size_t k) {
    return k < raw.size() && std::isdigit(static_cast<unsigned char>(raw[k])) != 0;
  };
  const auto alnum = [&](std::size_t k) {
    return k < raw.size() && std::isalnum(static_cast<unsigned char>(raw[k])) != 0;
  };

  std::size_t i = 0;
  while (i < raw.size()) {
    if (!digit(i)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    std::size_t j = i;
    while (digit(j)) ++j;
    int fraction_digits = 0;
    bool malformed = false;
    if (j < raw.size() && raw[j] == '.' && digit(j + 1)) {
      ++j;
      while (digit(j)) {
        ++j;
        ++fraction_digits;
      }
    }
    // "1.2.3" and "1,000" are single tokens that are not ratings.
    while (j < raw.size() && (raw[j] == '.' || raw[j] == ',') && digit(j + 1)) {
      malformed = true;
      ++j;
      while (digit(j)) ++j;
    }
    i = j;

    const bool negative = start > 0 && raw[start - 1] == '-' && !alnum(start - 2);
    const bool bare_fraction = start > 0 && raw[start - 1] == '.';
    if (malformed || negative || bare_fraction || fraction_digits > 1) continue;

    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(raw.data() + start, raw.data() + j, value);
    if (ec != std::errc() || ptr != raw.data() + j) continue;
    if (value >= kScaleMin && value <= kScaleMax) return value;
  }
  return std::nullopt;
}

}  // namespace debatelab
