#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debatelab/gateway.hpp"
#include "debatelab/persona.hpp"
#include "debatelab/templates.hpp"

namespace debatelab {

inline constexpr int kSeedQuestionCount = 10;
inline constexpr int kExpandedQuestionCount = 90;
inline constexpr int kMaxExpansionAttempts = 20;
inline constexpr int kSamplesPerQuestion = 20;

struct QuestionSet {
  std::vector<std::string> seed;
  std::vector<std::string> expanded;

  std::vector<std::string> combined() const;
  bool operator==(const QuestionSet&) const = default;
};

// The ten hand-written questions the expansion starts from.
std::span<const std::string_view> seed_questions();

std::string build_expansion_prompt(std::string_view example_question,
                                   const PromptTemplates& templates = PromptTemplates::defaults());

// Items of a "1. ..." / "2) ..." list, trimmed; other lines are ignored.
std::vector<std::string> parse_numbered_list(std::string_view text);

// Case-insensitive exact-match key used for deduplication.
std::string question_key(std::string_view question);

// True when the question names either party.
bool mentions_party(std::string_view question);

struct ExpansionOptions {
  int target = kExpandedQuestionCount;
  int max_attempts = kMaxExpansionAttempts;
  int max_tokens = 600;
  const PromptTemplates* templates = nullptr;
  RequestLog* log = nullptr;
};

// Prompts with each seed in turn until `target` unique, party-neutral
// questions are collected. Throws ExpansionExhausted after max_attempts.
QuestionSet expand_questions(std::span<const std::string> seeds, Gateway& gateway,
                             const ExpansionOptions& options = {});

struct TuneExample {
  std::string question;
  std::string response;
  Party party = Party::Republican;
  int question_index = 0;
  int sample_index = 0;

  bool operator==(const TuneExample&) const = default;
};

struct HarvestFailure {
  int question_index = 0;
  int sample_index = 0;
  std::string reason;
};

struct HarvestResult {
  std::vector<TuneExample> examples;
  std::vector<HarvestFailure> failures;
};

struct HarvestOptions {
  int samples_per_question = kSamplesPerQuestion;
  int max_tokens = 200;
  int parallelism = 1;
  RequestLog* log = nullptr;
};

std::string build_harvest_prompt(const Persona& persona, std::string_view question);

// "Question: {q}\nAnswer: {r}"
std::string render_training_text(std::string_view question, std::string_view response);

// Samples every question `samples_per_question` times at temperature 1.0.
// Empty answers are regenerated once, then recorded as failures.
HarvestResult harvest(Party party, const Persona& persona, const QuestionSet& questions,
                      Gateway& gateway, const HarvestOptions& options = {});

struct PreferencePair {
  std::string prompt;
  std::string chosen;
  std::string rejected;
  int sample_index = 0;

  bool operator==(const PreferencePair&) const = default;
};

struct PairingStats {
  int matched = 0;
  int missing = 0;    // target slots without an opposing counterpart
  int identical = 0;  // dropped because chosen == rejected
};

// Pairs examples on (question, sample_index). Throws DisjointQuestionSets
// when nothing matches.
std::vector<PreferencePair> build_preference_pairs(std::span<const TuneExample> target,
                                                   std::span<const TuneExample> opposing,
                                                   PairingStats* stats = nullptr);

// One {question, response, party, sample_index, text} object per line,
// ordered by (question index, sample index).
void export_sft(const std::filesystem::path& path, std::span<const TuneExample> examples);
std::string sft_jsonl(std::span<const TuneExample> examples);
std::vector<TuneExample> read_sft(const std::filesystem::path& path);

// One {prompt, chosen, rejected} object per line.
void export_dpo(const std::filesystem::path& path, std::span<const PreferencePair> pairs);
std::vector<PreferencePair> read_dpo(const std::filesystem::path& path);

void write_questions(const std::filesystem::path& path, const QuestionSet& questions);
QuestionSet read_questions(const std::filesystem::path& path);

}  // namespace debatelab
