#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "debatelab/gateway.hpp"

namespace debatelab {

struct RatingQuery {
  std::string_view role;
  int survey_index = 0;
  int attempt = 0;
  std::string_view stream;
  std::string_view persona_id;
};

// Maps a survey request to the text the scripted backend answers with.
// Returning nullopt falls back to the rule table.
using RatingFunction = std::function<std::optional<std::string>(const RatingQuery&)>;

// One scripted response. A rule applies when every present matcher accepts
// the request. Templates expand {{prompt}}, {{call}}, {{sample}},
// {{survey}}, {{persona}}, {{role}}, {{stream}} and regex groups {{1}}..{{9}}.
struct ScriptRule {
  std::optional<RequestKind> kind;
  std::string contains;
  std::string pattern;
  std::string response;
};

struct ScriptedProgram {
  std::vector<ScriptRule> rules;
  std::string default_response;
  RatingFunction rating_function;
};

namespace rating {

// role -> ratings indexed by survey index (the last entry repeats).
RatingFunction table(std::map<std::string, std::vector<std::string>> by_role);

struct LinearTrajectory {
  double start = 0.0;
  double target = 0.0;
  double step = 0.0;
};

// Moves from start toward target by `step` per survey, never overshooting.
// `format` may embed the value as {value}.
RatingFunction linear(std::map<std::string, LinearTrajectory> by_role,
                      std::string format = "{value}");

// Value of a linear trajectory at `survey_index`; shared with tests.
double linear_value(const LinearTrajectory& t, int survey_index);

// Pseudo-random rating on the grid {min, min+step, ..., max}, a pure
// function of (seed, stream, persona, survey index).
RatingFunction hashed(double min, double max, double step, std::uint64_t seed);

}  // namespace rating

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Formats a rating with up to one decimal ("7", "6.5").
std::string format_rating(double value);

class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::shared_ptr<const ScriptedProgram> program);

  BackendReply generate(const CompletionRequest& request,
                        std::chrono::milliseconds timeout) override;

  std::string respond(std::string_view prompt, const RequestContext& context);

 private:
  struct CompiledRule {
    const ScriptRule* rule;
    std::optional<std::regex> regex;
  };

  std::shared_ptr<const ScriptedProgram> program_;
  std::vector<CompiledRule> compiled_;
  std::mutex mu_;
  std::map<std::string, int> stream_calls_;
};

}  // namespace debatelab
