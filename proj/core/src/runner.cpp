#include "debatelab/runner.hpp"

#include <algorithm>
#include <cstdio>

#include "debatelab/errors.hpp"
#include "debatelab/parallel.hpp"

namespace debatelab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

std::string_view to_string(Family family) {
  switch (family) {
    case Family::ThreeWayCross: return "three-way-cross";
    case Family::TwoWayCross: return "two-way-cross";
    case Family::EchoChamberWithDefault: return "echo-chamber-with-default";
    case Family::EchoChamberWithoutDefault: return "echo-chamber-without-default";
  }
  return "three-way-cross";
}

std::optional<Family> family_from_string(std::string_view name) {
  for (auto f : {Family::ThreeWayCross, Family::TwoWayCross, Family::EchoChamberWithDefault,
                 Family::EchoChamberWithoutDefault})
    if (to_string(f) == name) return f;
  return std::nullopt;
}

bool is_echo_chamber(Family family) {
  return family == Family::EchoChamberWithDefault || family == Family::EchoChamberWithoutDefault;
}

std::string run_dir_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run-%03d", index);
  return buf;
}

int Campaign::completed_runs() const {
  return static_cast<int>(std::count_if(runs.begin(), runs.end(), [](const RunRef& r) {
    return r.status == RunStatus::Completed;
  }));
}

namespace {

const std::vector<Persona>& roster_for(const ExperimentSpec& spec, Party party) {
  return party == Party::Republican ? spec.republicans : spec.democrats;
}

void require_roster(const ExperimentSpec& spec, Party party, std::size_t needed) {
  const auto& roster = roster_for(spec, party);
  if (roster.size() < needed)
    throw RosterExhausted(std::string(to_string(party)) + " roster has " +
                          std::to_string(roster.size()) + " personas but " +
                          std::to_string(needed) + " are needed for " +
                          std::to_string(spec.repetitions) + " repetitions");
  for (std::size_t i = 0; i < needed; ++i)
    if (roster[i].party != party)
      throw ConfigError("persona " + roster[i].id + " in the " + std::string(to_string(party)) +
                        " roster belongs to another party");
}

}  // namespace

std::vector<DebateConfig> plan_runs(const ExperimentSpec& spec) {
  if (spec.repetitions <= 0) throw ConfigError("repetitions must be positive");
  if (spec.cycles <= 0) throw ConfigError("cycles must be positive");
  const auto reps = static_cast<std::size_t>(spec.repetitions);

  const bool echo = is_echo_chamber(spec.family);
  Party echo_party = Party::Republican;
  if (echo) {
    if (!spec.echo_party || *spec.echo_party == Party::Default)
      throw ConfigError("echo-chamber experiments need a partisan echo_party");
    echo_party = *spec.echo_party;
    require_roster(spec, echo_party, 2 * reps);
  } else {
    require_roster(spec, Party::Republican, reps);
    require_roster(spec, Party::Democrat, reps);
  }
  const bool with_default =
      spec.family == Family::ThreeWayCross || spec.family == Family::EchoChamberWithDefault;

  std::vector<DebateConfig> plan;
  plan.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    DebateConfig c;
    c.debate_id = run_dir_name(static_cast<int>(r));
    c.topic = spec.topic;
    c.cycles = spec.cycles;
    c.reply_params = spec.reply_params;
    c.survey_params = spec.survey_params;
    c.rng_seed = spec.base_seed + r;
    c.templates = spec.templates;
    if (echo) {
      const auto& roster = roster_for(spec, echo_party);
      const std::string party(to_string(echo_party));
      c.participants.push_back({roster[2 * r], party + " 1"});
      c.participants.push_back({roster[2 * r + 1], party + " 2"});
    } else {
      c.participants.push_back({spec.republicans[r], "Republican"});
      c.participants.push_back({spec.democrats[r], "Democrat"});
    }
    if (with_default) {
      char id[32];
      std::snprintf(id, sizeof id, "default-%03zu", r);
      c.participants.push_back({default_persona(id, spec.default_name), "Default"});
    }
    c.validate();
    plan.push_back(std::move(c));
  }
  return plan;
}

ordered_json manifest_json(const Campaign& campaign) {
  const auto& spec = campaign.spec;
  ordered_json j;
  j["schema_version"] = 1;
  j["family"] = to_string(spec.family);
  j["echo_party"] = spec.echo_party ? ordered_json(to_string(*spec.echo_party)) : ordered_json(nullptr);
  j["topic"] = spec.topic.slug;
  j["repetitions"] = spec.repetitions;
  j["cycles"] = spec.cycles;
  j["base_seed"] = spec.base_seed;
  j["rosters"] = {{"republican", spec.republican_roster}, {"democrat", spec.democrat_roster}};
  j["backend"] = {{"kind", campaign.backend_kind}, {"model", campaign.backend_model}};
  ordered_json runs = ordered_json::array();
  for (const auto& r : campaign.runs) {
    ordered_json rj;
    rj["index"] = r.index;
    rj["dir"] = r.dir;
    rj["status"] = to_string(r.status);
    rj["error"] = r.error;
    rj["unparsed_surveys"] = r.unparsed_surveys;
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);
  j["data_quality"] = {{"unparsed_surveys", campaign.data_quality.unparsed_surveys},
                       {"failed_runs", campaign.data_quality.failed_runs}};
  return j;
}

Campaign execute(const ExperimentSpec& spec, const std::vector<DebateConfig>& plan, Gateway& gateway,
                 const fs::path& root, const ExecuteOptions& options) {
  if (plan.empty()) throw ConfigError("cannot execute an empty plan");
  if (options.parallelism <= 0) throw ConfigError("parallelism must be positive");
  fs::create_directories(root);
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory() && entry.path().extension() == ".tmp") fs::remove_all(entry.path());

  Campaign campaign;
  campaign.spec = spec;
  campaign.root = root;
  campaign.backend_kind = std::string(to_string(gateway.spec().kind));
  campaign.backend_model = gateway.spec().model_name;
  campaign.runs.resize(plan.size());

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    RunRef& ref = campaign.runs[i];
    ref.index = static_cast<int>(i);
    ref.dir = plan[i].debate_id.empty() ? run_dir_name(ref.index) : plan[i].debate_id;
    const auto stored = read_run_dir(root / ref.dir);
    if (stored && (stored->status == RunStatus::Completed || !options.rerun_failed)) {
      ref.status = stored->status;
      ref.error = stored->error;
      ref.unparsed_surveys = static_cast<int>(std::count_if(
          stored->surveys.begin(), stored->surveys.end(), [](const SurveyRecord& s) { return !s.score; }));
      continue;
    }
    pending.push_back(i);
  }

  parallel_for(pending.size(), options.parallelism, [&](std::size_t k) {
    const std::size_t i = pending[k];
    RunRef& ref = campaign.runs[i];
    RequestLog log;
    RunOutcome outcome;
    try {
      outcome.result = run_debate(plan[i], gateway, &log);
      outcome.status = RunStatus::Completed;
    } catch (const std::exception& e) {
      outcome.status = RunStatus::Failed;
      outcome.error = e.what();
      outcome.result.reset();
    }
    write_run_dir(root / ref.dir, plan[i], outcome, log.lines());
    ref.status = outcome.status;
    ref.error = outcome.error;
    ref.unparsed_surveys = outcome.result ? outcome.result->unparsed_surveys() : 0;
  });

  for (const auto& r : campaign.runs) {
    if (r.status == RunStatus::Failed) ++campaign.data_quality.failed_runs;
    campaign.data_quality.unparsed_surveys += r.unparsed_surveys;
  }
  write_file_atomic(root / "campaign.json", manifest_json(campaign).dump(2) + "\n");
  return campaign;
}

Campaign load_campaign(const fs::path& root) {
  const auto path = root / "campaign.json";
  if (!fs::exists(path)) throw ConfigError("no campaign manifest at " + path.string());
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("malformed campaign manifest " + path.string() + ": " + e.what());
  }
  Campaign c;
  c.root = root;
  const auto family = family_from_string(j.at("family").get<std::string>());
  if (!family) throw ConfigError("unknown family in " + path.string());
  c.spec.family = *family;
  if (!j.at("echo_party").is_null())
    c.spec.echo_party = party_from_string(j["echo_party"].get<std::string>());
  c.spec.topic = topic_from_slug(j.at("topic").get<std::string>());
  c.spec.repetitions = j.at("repetitions").get<int>();
  c.spec.cycles = j.at("cycles").get<int>();
  c.spec.base_seed = j.at("base_seed").get<std::uint64_t>();
  c.spec.republican_roster = j.at("rosters").value("republican", std::string());
  c.spec.democrat_roster = j.at("rosters").value("democrat", std::string());
  c.backend_kind = j.at("backend").value("kind", std::string());
  c.backend_model = j.at("backend").value("model", std::string());
  for (const auto& rj : j.at("runs")) {
    RunRef r;
    r.index = rj.at("index").get<int>();
    r.dir = rj.at("dir").get<std::string>();
    r.status = rj.at("status").get<std::string>() == "completed" ? RunStatus::Completed : RunStatus::Failed;
    r.error = rj.value("error", std::string());
    r.unparsed_surveys = rj.value("unparsed_surveys", 0);
    c.runs.push_back(std::move(r));
  }
  c.data_quality.unparsed_surveys = j.at("data_quality").value("unparsed_surveys", 0);
  c.data_quality.failed_runs = j.at("data_quality").value("failed_runs", 0);
  return c;
}

}  // namespace debatelab
