#include "debatelab/config.hpp"

#include <cstdlib>

#include "debatelab/errors.hpp"
#include "debatelab/run_store.hpp"

namespace debatelab {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

RatingFunction rating_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "table") {
    return rating::table(j.at("table").get<std::map<std::string, std::vector<std::string>>>());
  }
  if (type == "linear") {
    std::map<std::string, rating::LinearTrajectory> roles;
    for (const auto& [role, t] : j.at("roles").items())
      roles[role] = {t.at("start").get<double>(), t.at("target").get<double>(), t.at("step").get<double>()};
    return rating::linear(std::move(roles), j.value("format", std::string("{value}")));
  }
  if (type == "hashed") {
    return rating::hashed(j.value("min", 0.0), j.value("max", 10.0), j.value("step", 1.0),
                          j.value("seed", std::uint64_t{0}));
  }
  throw ConfigError("unknown rating_function type '" + type + "'");
}

}  // namespace

EnvLookup process_env() {
  return [](std::string_view name) -> std::optional<std::string> {
    const char* v = std::getenv(std::string(name).c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

std::string interpolate_env(std::string_view text, const EnvLookup& env) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto open = text.find("${", i);
    if (open == std::string_view::npos) break;
    const auto close = text.find('}', open + 2);
    if (close == std::string_view::npos) throw ConfigError("unterminated ${ in '" + std::string(text) + "'");
    out.append(text.substr(i, open - i));
    const auto expr = text.substr(open + 2, close - open - 2);
    const auto sep = expr.find(":-");
    const auto name = expr.substr(0, sep);
    if (name.empty()) throw ConfigError("empty variable name in '" + std::string(text) + "'");
    if (auto value = env(name)) {
      out += *value;
    } else if (sep != std::string_view::npos) {
      out.append(expr.substr(sep + 2));
    } else {
      throw ConfigError("environment variable " + std::string(name) + " is not set");
    }
    i = close + 1;
  }
  if (i < text.size()) out.append(text.substr(i));
  return out;
}

void interpolate_env_in_place(json& j, const EnvLookup& env) {
  if (j.is_string()) {
    j = interpolate_env(j.get_ref<const std::string&>(), env);
  } else if (j.is_structured()) {
    for (auto& child : j) interpolate_env_in_place(child, env);
  }
}

json load_config_file(const fs::path& path, const EnvLookup& env, bool require_schema) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  json j;
  try {
    j = json::parse(read_file(path), nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path.string() + " must contain a JSON object");
  if (j.contains("schema_version")) {
    if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != kSchemaVersion)
      throw ConfigError(path.string() + ": unsupported schema_version (expected " +
                        std::to_string(kSchemaVersion) + ")");
  } else if (require_schema) {
    throw ConfigError(path.string() + ": missing schema_version");
  }
  interpolate_env_in_place(j, env);
  return j;
}

std::shared_ptr<const ScriptedProgram> scripted_program_from_json(const json& j) {
  try {
    auto program = std::make_shared<ScriptedProgram>();
    program->default_response = j.value("default_response", std::string());
    if (j.contains("rules")) {
      for (const auto& rj : j.at("rules")) {
        ScriptRule rule;
        if (rj.contains("kind")) {
          const auto kind = request_kind_from_string(rj["kind"].get<std::string>());
          if (!kind) throw ConfigError("unknown rule kind '" + rj["kind"].get<std::string>() + "'");
          rule.kind = *kind;
        }
        rule.contains = rj.value("contains", std::string());
        rule.pattern = rj.value("regex", std::string());
        rule.response = rj.at("response").get<std::string>();
        program->rules.push_back(std::move(rule));
      }
    }
    if (j.contains("rating_function") && !j["rating_function"].is_null())
      program->rating_function = rating_from_json(j["rating_function"]);
    return program;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scripted program: ") + e.what());
  }
}

BackendSpec backend_spec_from_json(const json& j, const fs::path& base_dir) {
  try {
    BackendSpec spec;
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "scripted") {
      spec.kind = BackendKind::Scripted;
    } else if (kind == "remote") {
      spec.kind = BackendKind::Remote;
    } else {
      throw ConfigError("unknown backend kind '" + kind + "'");
    }
    spec.endpoint_url = j.value("endpoint_url", std::string());
    spec.model_name = j.value("model_name", spec.kind == BackendKind::Scripted ? std::string("scripted") : std::string());
    spec.auth_token_env_var = j.value("auth_token_env_var", spec.auth_token_env_var);
    spec.request_timeout = std::chrono::milliseconds(j.value("request_timeout_ms", spec.request_timeout.count()));
    spec.max_retries = j.value("max_retries", spec.max_retries);
    spec.max_concurrent_requests = j.value("max_concurrent_requests", spec.max_concurrent_requests);
    spec.backoff_initial = std::chrono::milliseconds(j.value("backoff_initial_ms", spec.backoff_initial.count()));
    spec.backoff_max = std::chrono::milliseconds(j.value("backoff_max_ms", spec.backoff_max.count()));
    const auto style = j.value("api_style", std::string("completions"));
    if (style == "chat") {
      spec.api_style = ApiStyle::Chat;
    } else if (style != "completions") {
      throw ConfigError("unknown api_style '" + style + "'");
    }
    if (j.contains("script")) {
      spec.script = scripted_program_from_json(j["script"]);
    } else if (j.contains("script_file")) {
      const auto path = resolve(base_dir, j["script_file"].get<std::string>());
      spec.script = scripted_program_from_json(load_config_file(path, process_env(), false));
    }
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed backend config: ") + e.what());
  }
}

BackendSpec load_backend_spec(const fs::path& path) {
  return backend_spec_from_json(load_config_file(path), path.parent_path());
}

ExperimentSpec experiment_spec_from_json(const json& j, const fs::path& base_dir) {
  try {
    ExperimentSpec spec;
    const auto family = family_from_string(j.at("family").get<std::string>());
    if (!family) throw ConfigError("unknown family '" + j["family"].get<std::string>() + "'");
    spec.family = *family;
    if (j.contains("templates_dir"))
      spec.templates = PromptTemplates::load_dir(resolve(base_dir, j["templates_dir"].get<std::string>()));
    spec.topic = make_topic(topic_from_slug(j.at("topic").get<std::string>()).key, spec.templates);
    spec.repetitions = j.value("repetitions", spec.repetitions);
    spec.cycles = j.value("cycles", spec.cycles);
    spec.base_seed = j.value("base_seed", spec.base_seed);
    spec.default_name = j.value("default_name", spec.default_name);
    if (j.contains("echo_party") && !j["echo_party"].is_null()) {
      const auto party = party_from_string(j["echo_party"].get<std::string>());
      if (!party) throw ConfigError("unknown echo_party");
      spec.echo_party = *party;
    }
    if (j.contains("reply_params")) spec.reply_params = generation_params_from_json(j["reply_params"], spec.reply_params);
    if (j.contains("survey_params"))
      spec.survey_params = generation_params_from_json(j["survey_params"], spec.survey_params);
    if (j.contains("rosters")) {
      const auto& rosters = j["rosters"];
      if (rosters.contains("republican") && !rosters["republican"].is_null()) {
        spec.republican_roster = rosters["republican"].get<std::string>();
        spec.republicans = read_roster(resolve(base_dir, spec.republican_roster));
      }
      if (rosters.contains("democrat") && !rosters["democrat"].is_null()) {
        spec.democrat_roster = rosters["democrat"].get<std::string>();
        spec.democrats = read_roster(resolve(base_dir, spec.democrat_roster));
      }
    }
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment spec: ") + e.what());
  }
}

ExperimentSpec load_experiment_spec(const fs::path& path) {
  return experiment_spec_from_json(load_config_file(path), path.parent_path());
}

}  // namespace debatelab
