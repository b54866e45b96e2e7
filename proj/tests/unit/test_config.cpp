#include <doctest.h>

#include <fstream>
#include <map>

#include "debatelab/config.hpp"
#include "debatelab/errors.hpp"
#include "test_support.hpp"

using namespace debatelab;
using namespace debatelab::testing;
using json = nlohmann::json;

namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](std::string_view name) -> std::optional<std::string> {
    const auto it = vars.find(std::string(name));
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("environment interpolation") {
  const auto env = fake_env({{"HOST", "example.org"}, {"EMPTY", ""}});
  CHECK(interpolate_env("https://${HOST}/v1", env) == "https://example.org/v1");
  CHECK(interpolate_env("${MISSING:-fallback}", env) == "fallback");
  CHECK(interpolate_env("${HOST:-unused}", env) == "example.org");
  CHECK(interpolate_env("[${EMPTY}]", env) == "[]");
  CHECK(interpolate_env("no vars here", env) == "no vars here");
  CHECK(interpolate_env("$HOST stays", env) == "$HOST stays");
  CHECK_THROWS_AS(interpolate_env("${MISSING}", env), ConfigError);
  CHECK_THROWS_AS(interpolate_env("${HOST", env), ConfigError);
  CHECK_THROWS_AS(interpolate_env("${}", env), ConfigError);
}

TEST_CASE("config files need schema_version 1 and may carry comments") {
  TempDir dir("config");
  write(dir / "ok.json", "// backend\n{\"schema_version\": 1, \"kind\": \"scripted\", /* inline */ \"model_name\": \"${M:-m0}\"}");
  const auto j = load_config_file(dir / "ok.json", fake_env({}));
  CHECK(j["model_name"] == "m0");

  write(dir / "v2.json", R"({"schema_version": 2})");
  CHECK_THROWS_AS(load_config_file(dir / "v2.json", fake_env({})), ConfigError);
  write(dir / "none.json", R"({"kind": "scripted"})");
  CHECK_THROWS_AS(load_config_file(dir / "none.json", fake_env({})), ConfigError);
  CHECK_NOTHROW(load_config_file(dir / "none.json", fake_env({}), false));
  write(dir / "broken.json", "{");
  CHECK_THROWS_AS(load_config_file(dir / "broken.json", fake_env({})), ConfigError);
  write(dir / "array.json", "[1]");
  CHECK_THROWS_AS(load_config_file(dir / "array.json", fake_env({}), false), ConfigError);
  CHECK_THROWS_AS(load_config_file(dir / "absent.json", fake_env({})), ConfigError);
}

TEST_CASE("backend specs") {
  TempDir dir("backend");
  const json remote = {{"kind", "remote"},
                       {"endpoint_url", "http://localhost:9/v1"},
                       {"model_name", "m"},
                       {"auth_token_env_var", "TOKEN"},
                       {"request_timeout_ms", 1500},
                       {"max_retries", 5},
                       {"max_concurrent_requests", 2},
                       {"api_style", "chat"}};
  const auto spec = backend_spec_from_json(remote, dir.path());
  CHECK(spec.kind == BackendKind::Remote);
  CHECK(spec.request_timeout == std::chrono::milliseconds(1500));
  CHECK(spec.max_retries == 5);
  CHECK(spec.max_concurrent_requests == 2);
  CHECK(spec.api_style == ApiStyle::Chat);
  CHECK(spec.auth_token_env_var == "TOKEN");

  CHECK_THROWS_AS(backend_spec_from_json({{"kind", "carrier-pigeon"}}, dir.path()), ConfigError);
  CHECK_THROWS_AS(backend_spec_from_json({{"kind", "remote"}, {"api_style", "smoke"}}, dir.path()), ConfigError);
  CHECK_THROWS_AS(backend_spec_from_json(json::object(), dir.path()), ConfigError);

  auto bad = remote;
  bad["max_concurrent_requests"] = 0;
  CHECK_THROWS_AS(backend_spec_from_json(bad, dir.path()), ConfigError);
}

TEST_CASE("script_file resolves relative to the config and drives the gateway") {
  TempDir dir("script");
  fs::create_directories(dir / "scripts");
  write(dir / "scripts" / "s.json", R"({
    "default_response": "fallback",
    "rules": [{"kind": "reply", "regex": "(\\w+):$", "response": "{{1}} speaks"}],
    "rating_function": {"type": "table", "table": {"Democrat": ["8", "7"]}}
  })");
  write(dir / "backend.json", R"({"schema_version": 1, "kind": "scripted", "script_file": "scripts/s.json"})");
  auto gw = Gateway::create(load_backend_spec(dir / "backend.json"));

  RequestContext reply;
  reply.kind = RequestKind::Reply;
  CHECK(gw->complete("Amelia:", GenerationParams::sampling(10), reply) == "Amelia speaks");
  CHECK(gw->complete("Amelia:", GenerationParams::sampling(10)) == "fallback");

  RequestContext survey;
  survey.kind = RequestKind::Survey;
  survey.role = "Democrat";
  survey.survey_index = 1;
  CHECK(gw->complete("q", GenerationParams::greedy(4), survey) == "7");
  survey.survey_index = 5;
  CHECK(gw->complete("q", GenerationParams::greedy(4), survey) == "7");
}

TEST_CASE("rating function types from JSON") {
  const auto linear = scripted_program_from_json(json::parse(R"({
    "rating_function": {"type": "linear", "format": "<{value}>",
                        "roles": {"Republican": {"start": 2, "target": 5, "step": 2.5}}}})"));
  RatingQuery q{"Republican", 0, 0, "s", "p"};
  CHECK(linear->rating_function(q) == std::optional<std::string>("<2>"));
  q.survey_index = 1;
  CHECK(linear->rating_function(q) == std::optional<std::string>("<4.5>"));
  q.survey_index = 2;
  CHECK(linear->rating_function(q) == std::optional<std::string>("<5>"));

  const auto hashed = scripted_program_from_json(json::parse(
      R"({"rating_function": {"type": "hashed", "min": 1, "max": 9, "step": 0.5, "seed": 4}})"));
  for (int s = 0; s < 50; ++s) {
    RatingQuery hq{"Default", s, 0, "stream", "p"};
    const double v = std::stod(*hashed->rating_function(hq));
    CHECK(v >= 1.0);
    CHECK(v <= 9.0);
    CHECK(std::fmod(v * 2.0, 1.0) == 0.0);
  }

  CHECK_THROWS_AS(scripted_program_from_json(json::parse(R"({"rating_function": {"type": "dice"}})")),
                  ConfigError);
  CHECK_THROWS_AS(scripted_program_from_json(json::parse(R"({"rules": [{"kind": "gossip", "response": ""}]})")),
                  ConfigError);
  CHECK_THROWS_AS(scripted_program_from_json(json::parse(R"({"rules": [{"contains": "x"}]})")), ConfigError);
}

TEST_CASE("experiment specs load rosters and templates relative to the file") {
  TempDir dir("spec");
  fs::create_directories(dir / "tpl");
  const auto reps = synthetic_roster(Party::Republican, 3);
  const auto dems = synthetic_roster(Party::Democrat, 3);
  write_roster(dir / "rep.jsonl", reps);
  write_roster(dir / "dem.jsonl", dems);
  write(dir / "tpl" / "debate_framing.txt", "Debate on {topic}.");
  write(dir / "exp.json", R"({
    "schema_version": 1,
    "family": "three-way-cross",
    "topic": "racism",
    "repetitions": 3,
    "cycles": 2,
    "base_seed": 100,
    "rosters": {"republican": "rep.jsonl", "democrat": "dem.jsonl"},
    "templates_dir": "tpl",
    "reply_params": {"max_tokens": 50}
  })");
  const auto spec = load_experiment_spec(dir / "exp.json");
  CHECK(spec.family == Family::ThreeWayCross);
  CHECK(spec.topic.key == TopicKey::Racism);
  CHECK(spec.topic.debate_framing == "Debate on racism.");
  CHECK(spec.topic.survey_question == topic(TopicKey::Racism).survey_question);
  CHECK(spec.repetitions == 3);
  CHECK(spec.cycles == 2);
  CHECK(spec.base_seed == 100);
  CHECK(spec.republicans == reps);
  CHECK(spec.democrats == dems);
  CHECK(spec.reply_params.max_tokens == 50);
  CHECK(spec.reply_params.temperature == 1.0);

  write(dir / "bad.json", R"({"schema_version": 1, "family": "four-way", "topic": "racism"})");
  CHECK_THROWS_AS(load_experiment_spec(dir / "bad.json"), ConfigError);
  write(dir / "bad2.json", R"({"schema_version": 1, "family": "two-way-cross", "topic": "taxes"})");
  CHECK_THROWS_AS(load_experiment_spec(dir / "bad2.json"), ConfigError);
}
