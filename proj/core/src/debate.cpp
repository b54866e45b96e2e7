#include "debatelab/debate.hpp"

#include <limits>
#include <random>
#include <set>

#include "debatelab/attitude.hpp"
#include "debatelab/errors.hpp"

namespace debatelab {

GenerationParams default_reply_params() { return GenerationParams::sampling(kDefaultReplyMaxTokens); }

GenerationParams default_survey_params() { return GenerationParams::greedy(kDefaultSurveyMaxTokens); }

void DebateConfig::validate() const {
  if (participants.size() < 2 || participants.size() > 3)
    throw ConfigError("a debate needs 2 or 3 participants");
  if (cycles <= 0) throw ConfigError("cycles must be positive");
  std::set<std::string> ids;
  std::set<std::string> names;
  std::set<std::string> roles;
  for (const auto& p : participants) {
    if (p.persona.name.empty()) throw ConfigError("participant without a name");
    if (!ids.insert(p.persona.id).second) throw ConfigError("duplicate participant id " + p.persona.id);
    if (!names.insert(p.persona.name).second)
      throw ConfigError("duplicate participant name " + p.persona.name);
    if (!roles.insert(p.role).second) throw ConfigError("duplicate participant role " + p.role);
  }
  reply_params.validate();
  survey_params.validate();
}

std::size_t DebateConfig::start_index() const {
  const auto n = static_cast<std::uint64_t>(participants.size());
  if (n == 0) return 0;
  std::mt19937_64 engine(rng_seed);
  // Rejection sampling keeps the choice exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw = engine();
  while (draw >= limit) draw = engine();
  return static_cast<std::size_t>(draw % n);
}

std::size_t DebateConfig::speaker_at(int iteration) const {
  return (start_index() + static_cast<std::size_t>(iteration - 1)) % participants.size();
}

int DebateResult::unparsed_surveys() const {
  int n = 0;
  for (const auto& s : surveys)
    if (!s.score) ++n;
  return n;
}

std::string assemble_reply_prompt(const Persona& persona, const Topic& topic,
                                  const Transcript& transcript, const PromptTemplates& templates) {
  std::string prompt = persona.background_story;
  prompt += "\n\n";
  prompt += substitute(templates.debate_framing, {{"topic", topic.display_name}});
  prompt += "\n\n";
  if (!transcript.empty()) {
    prompt += render_history(transcript);
    prompt += '\n';
  }
  prompt += persona.name;
  prompt += ':';
  return prompt;
}

std::vector<std::string> reply_stop_sequences(const std::vector<Participant>& participants) {
  std::vector<std::string> stops;
  stops.reserve(participants.size());
  for (const auto& p : participants) stops.push_back("\n" + p.persona.name + ":");
  return stops;
}

DebateResult run_debate(const DebateConfig& config, Gateway& gateway, RequestLog* log) {
  config.validate();
  const auto n = static_cast<int>(config.participants.size());
  const std::size_t start = config.start_index();

  GenerationParams reply_params = config.reply_params;
  for (auto& stop : reply_stop_sequences(config.participants)) reply_params.stop_sequences.push_back(stop);

  DebateResult result;
  result.surveys.reserve(static_cast<std::size_t>(n * (config.cycles + 1)));

  const auto survey_all = [&](int checkpoint) {
    for (const auto& p : config.participants) {
      RequestContext ctx;
      ctx.kind = RequestKind::Survey;
      ctx.stream = config.debate_id;
      ctx.persona_id = p.persona.id;
      ctx.role = p.role;
      ctx.survey_index = checkpoint / n;
      ctx.log = log;

      SurveyRecord record;
      record.persona_id = p.persona.id;
      record.role = p.role;
      record.checkpoint_iteration = checkpoint;
      for (int attempt = 0; attempt < 2; ++attempt) {
        ctx.survey_attempt = attempt;
        const auto prompt =
            build_survey_prompt(p.persona, config.topic, result.transcript, attempt > 0, config.templates);
        try {
          record.raw_response = gateway.complete(prompt, config.survey_params, ctx);
        } catch (const EmptyCompletion&) {
          record.raw_response.clear();
        }
        record.attempts = attempt + 1;
        record.score = parse_rating(record.raw_response);
        if (record.score) break;
      }
      result.surveys.push_back(std::move(record));
    }
  };

  survey_all(0);
  int iteration = 0;
  for (int cycle = 0; cycle < config.cycles; ++cycle) {
    for (int turn = 0; turn < n; ++turn) {
      ++iteration;
      const auto& speaker = config.participants[(start + static_cast<std::size_t>(iteration - 1)) %
                                                static_cast<std::size_t>(n)];
      RequestContext ctx;
      ctx.kind = RequestKind::Reply;
      ctx.stream = config.debate_id;
      ctx.persona_id = speaker.persona.id;
      ctx.role = speaker.role;
      ctx.log = log;

      const auto prompt =
          assemble_reply_prompt(speaker.persona, config.topic, result.transcript, config.templates);
      std::string utterance;
      for (int attempt = 0; attempt < 2 && utterance.empty(); ++attempt) {
        try {
          utterance = gateway.complete(prompt, reply_params, ctx);
        } catch (const EmptyCompletion&) {
        }
      }
      if (utterance.empty())
        throw GenerationFailed("reply " + std::to_string(iteration) + " by " + speaker.persona.name +
                               " was empty twice");
      result.transcript.entries.push_back(
          {iteration, speaker.persona.id, speaker.persona.name, std::move(utterance)});
    }
    survey_all((cycle + 1) * n);
  }
  return result;
}

}  // namespace debatelab
