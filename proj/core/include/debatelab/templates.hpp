#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace debatelab {

// Editable prompt wording. Every field uses {placeholder} substitution.
//   meta_prompt      {name} {party} {stances}
//   debate_framing   {topic}
//   survey_question  {topic}
//   survey_retry     (no placeholders)
//   expansion_prompt {question}
struct PromptTemplates {
  std::string meta_prompt;
  std::string debate_framing;
  std::string survey_question;
  std::string survey_retry;
  std::string expansion_prompt;

  // Matches the files shipped under core/templates/.
  static const PromptTemplates& defaults();

  // Overrides defaults with `<field>.txt` files found in `dir`.
  static PromptTemplates load_dir(const std::filesystem::path& dir);
};

std::string substitute(std::string_view tmpl,
                       const std::vector<std::pair<std::string_view, std::string_view>>& vars);

}  // namespace debatelab
