#include "debatelab/templates.hpp"

#include <fstream>
#include <sstream>

#include "debatelab/errors.hpp"

namespace debatelab {

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates t{
      "Write a short background story, in the first person, for {name}, an American who is a "
      "proud {party}. Describe where {name} grew up, what {name} does for a living, and the "
      "values that guide {name}'s politics. When asked how much of a problem each of the "
      "following issues is in the country today, {name} answers:\n"
      "{stances}\n"
      "Mention that {name} is a {party} and keep the story under 150 words.",
      "The following is a debate about {topic} in America.",
      "On a scale of 0 to 10, how big of a problem is {topic} in the country today? Answer with "
      "a single number.",
      "Answer with a single number between 0 and 10.",
      "Generate 10 questions to elicit one's opinion regarding US politics. Example question: "
      "{question}. Phrase your question in a neutral way without biasing the answer",
  };
  return t;
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw ConfigError("template directory not found: " + dir.string());
  PromptTemplates t = defaults();
  const auto load = [&](const char* name, std::string& field) {
    const auto path = dir / (std::string(name) + ".txt");
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    field = ss.str();
    while (!field.empty() && (field.back() == '\n' || field.back() == '\r')) field.pop_back();
  };
  load("meta_prompt", t.meta_prompt);
  load("debate_framing", t.debate_framing);
  load("survey_question", t.survey_question);
  load("survey_retry", t.survey_retry);
  load("expansion_prompt", t.expansion_prompt);
  return t;
}

std::string substitute(std::string_view tmpl,
                       const std::vector<std::pair<std::string_view, std::string_view>>& vars) {
  std::string out;
  out.reserve(tmpl.size() + 64);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find('{', i);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find('}', open + 1);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(i, open - i));
    const auto key = tmpl.substr(open + 1, close - open - 1);
    bool replaced = false;
    for (const auto& [name, value] : vars) {
      if (name == key) {
        out.append(value);
        replaced = true;
        break;
      }
    }
    if (!replaced) out.append(tmpl.substr(open, close - open + 1));
    i = close + 1;
  }
  if (i < tmpl.size()) out.append(tmpl.substr(i));
  return out;
}

}  // namespace debatelab
