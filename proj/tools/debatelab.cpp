// debatelab command-line tool.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "debatelab/analysis.hpp"
#include "debatelab/clock.hpp"
#include "debatelab/config.hpp"
#include "debatelab/errors.hpp"
#include "debatelab/gateway.hpp"
#include "debatelab/persona.hpp"
#include "debatelab/run_store.hpp"
#include "debatelab/runner.hpp"
#include "debatelab/tuneset.hpp"

namespace fs = std::filesystem;
using namespace debatelab;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Globals {
  std::string workdir = ".";
  std::optional<std::int64_t> seed;
  int parallelism = 1;

  fs::path at(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : fs::path(workdir) / path;
  }
};

Party require_party(const std::string& name) {
  const auto p = party_from_string(name);
  if (!p || *p == Party::Default) throw ConfigError("--party must be republican or democrat, got '" + name + "'");
  return *p;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string join_lines(const RequestLog& log) {
  std::string out;
  for (const auto& line : log.lines()) out += line + "\n";
  return out;
}

std::shared_ptr<Gateway> open_gateway(const Globals& g, const std::string& config) {
  return Gateway::create(load_backend_spec(g.at(config)));
}

// --- gen-personas ------------------------------------------------------------

struct GenPersonas {
  std::string party;
  int count = 40;
  std::string out;
  std::string backend;
};

int gen_personas(const Globals& g, const GenPersonas& o) {
  const Party party = require_party(o.party);
  if (o.count <= 0) throw ConfigError("--count must be positive");
  auto gateway = open_gateway(g, o.backend);

  const auto pool_view = bundled_name_pool();
  const std::vector<std::string> pool(pool_view.begin(), pool_view.end());
  RosterOptions options;
  options.name_offset = default_name_offset(party, pool.size());
  options.parallelism = g.parallelism;
  options.seed = g.seed;
  const auto roster = generate_roster(party, o.count, *gateway, pool, options);

  const auto out = g.at(o.out.empty() ? "personas-" + lower(to_string(party)) + ".jsonl" : o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_roster(out, roster);

  std::size_t max_words = 0;
  for (const auto& p : roster) max_words = std::max(max_words, word_count(p.background_story));
  std::printf("wrote %zu %s personas to %s (all stories valid, longest %zu words)\n", roster.size(),
              std::string(to_string(party)).c_str(), out.string().c_str(), max_words);
  return 0;
}

// --- run-experiment ----------------------------------------------------------

struct RunExperiment {
  std::string spec;
  std::string backend;
  std::string out = "campaign";
  bool rerun_failed = false;
};

int run_experiment(const Globals& g, const RunExperiment& o) {
  auto spec = load_experiment_spec(g.at(o.spec));
  if (g.seed) spec.base_seed = static_cast<std::uint64_t>(*g.seed);
  auto gateway = open_gateway(g, o.backend);
  const auto plan = plan_runs(spec);

  ExecuteOptions options;
  options.parallelism = g.parallelism;
  options.rerun_failed = o.rerun_failed;
  const auto campaign = execute(spec, plan, *gateway, g.at(o.out), options);

  std::printf("%s on %s: %d/%zu runs completed, %d failed, %d unparsed surveys\n",
              std::string(to_string(spec.family)).c_str(), spec.topic.slug.c_str(), campaign.completed_runs(),
              campaign.runs.size(), campaign.data_quality.failed_runs, campaign.data_quality.unparsed_surveys);
  for (const auto& r : campaign.runs)
    if (r.status == RunStatus::Failed) std::fprintf(stderr, "  %s failed: %s\n", r.dir.c_str(), r.error.c_str());
  return campaign.completed_runs() == 0 ? 2 : 0;
}

// --- analyze -----------------------------------------------------------------

struct Analyze {
  std::string campaign;
  std::string baseline_campaign;
  std::string before;
  std::string after;
  std::string out = "analysis";
  double margin = kDefaultModerationMargin;
};

int analyze(const Globals& g, const Analyze& o) {
  if (o.campaign.empty() && (o.before.empty() || o.after.empty()))
    throw ConfigError("analyze needs --campaign or both --before and --after");
  if (o.before.empty() != o.after.empty()) throw ConfigError("--before and --after go together");

  const auto out = g.at(o.out);
  fs::create_directories(out);
  ordered_json report;

  if (!o.campaign.empty()) {
    const auto campaign = load_campaign(g.at(o.campaign));
    AggregateStats stats;
    const auto curves = aggregate(campaign, &stats);
    export_plot_data(out / "curves.csv", curves);
    report["campaign"] = o.campaign;
    report["family"] = to_string(campaign.spec.family);
    report["topic"] = campaign.spec.topic.slug;
    report["stats"] = to_json(stats);

    std::optional<double> baseline;
    if (!o.baseline_campaign.empty()) {
      baseline = default_baseline(aggregate(load_campaign(g.at(o.baseline_campaign))));
      report["baseline_source"] = o.baseline_campaign;
    } else if (find_curve(curves, "Default") != nullptr) {
      baseline = default_baseline(curves);
      report["baseline_source"] = o.campaign;
    }
    report["default_baseline"] = baseline ? ordered_json(*baseline) : ordered_json(nullptr);

    if (baseline && find_curve(curves, "Republican") && find_curve(curves, "Democrat"))
      report["convergence"] = to_json(convergence_report(curves, *baseline));
    if (baseline && is_echo_chamber(campaign.spec.family))
      report["echo_chamber"] = to_json(echo_chamber_test(campaign, *baseline, o.margin));
    std::printf("%zu curves written to %s\n", curves.size(), (out / "curves.csv").string().c_str());
  }

  if (!o.before.empty()) {
    const auto before = aggregate(load_campaign(g.at(o.before)));
    const auto after = aggregate(load_campaign(g.at(o.after)));
    const auto delta = finetune_delta(before, after);
    report["delta"] = to_json(delta);
    std::string csv = "role,checkpoint,before,after,delta\n";
    for (const auto& p : delta.points) {
      char buf[160];
      std::snprintf(buf, sizeof buf, ",%d,%.17g,%.17g,%.17g\n", p.checkpoint, p.before, p.after, p.delta);
      csv += p.role + buf;
    }
    write_file_atomic(out / "delta.csv", csv);
    std::printf("mean delta %.3f over %zu points\n", delta.mean_delta, delta.points.size());
  }

  write_file_atomic(out / "report.json", report.dump(2) + "\n");
  return 0;
}

// --- build-tuneset / build-dpo -----------------------------------------------

struct BuildTuneset {
  std::string party;
  std::string persona;
  std::string persona_id;
  std::string backend;
  std::string out = "tuneset";
  int samples = kSamplesPerQuestion;
};

int build_tuneset(const Globals& g, const BuildTuneset& o) {
  const Party party = require_party(o.party);
  const auto roster = read_roster(g.at(o.persona));
  const Persona* persona = nullptr;
  for (const auto& p : roster) {
    if (p.party != party) continue;
    if (o.persona_id.empty() || p.id == o.persona_id) {
      persona = &p;
      break;
    }
  }
  if (persona == nullptr) throw ConfigError("no matching " + std::string(to_string(party)) + " persona in " + o.persona);

  auto gateway = open_gateway(g, o.backend);
  const auto out = g.at(o.out);
  fs::create_directories(out);
  const std::string slug = lower(to_string(party));

  const auto questions_path = out / "questions.json";
  QuestionSet questions;
  if (fs::exists(questions_path)) {
    questions = read_questions(questions_path);
  } else {
    const auto seeds_view = seed_questions();
    const std::vector<std::string> seeds(seeds_view.begin(), seeds_view.end());
    RequestLog expansion_log;
    ExpansionOptions eo;
    eo.log = &expansion_log;
    questions = expand_questions(seeds, *gateway, eo);
    write_file_atomic(out / "requests-expansion.jsonl", join_lines(expansion_log));
    write_questions(questions_path, questions);
  }

  RequestLog log;

  HarvestOptions ho;
  ho.samples_per_question = o.samples;
  ho.parallelism = g.parallelism;
  ho.log = &log;
  const auto started = gateway->clock().now_us();
  const auto result = harvest(party, *persona, questions, *gateway, ho);
  const auto finished = gateway->clock().now_us();

  export_sft(out / ("sft-" + slug + ".jsonl"), result.examples);
  write_file_atomic(out / ("requests-" + slug + ".jsonl"), join_lines(log));

  ordered_json manifest;
  manifest["schema_version"] = 1;
  manifest["party"] = to_string(party);
  manifest["persona_id"] = persona->id;
  manifest["persona_source"] = o.persona;
  manifest["backend"] = {{"kind", to_string(gateway->spec().kind)}, {"model", gateway->spec().model_name}};
  manifest["started_at"] = format_iso8601(started);
  manifest["finished_at"] = format_iso8601(finished);
  manifest["questions"] = questions.combined().size();
  manifest["samples_per_question"] = o.samples;
  manifest["examples"] = result.examples.size();
  ordered_json failures = ordered_json::array();
  for (const auto& f : result.failures)
    failures.push_back({{"question_index", f.question_index}, {"sample_index", f.sample_index}, {"reason", f.reason}});
  manifest["failures"] = std::move(failures);
  write_file_atomic(out / ("manifest-" + slug + ".json"), manifest.dump(2) + "\n");

  std::printf("%zu questions, %zu %s examples, %zu failed slots\n", questions.combined().size(),
              result.examples.size(), std::string(to_string(party)).c_str(), result.failures.size());
  return 0;
}

struct BuildDpo {
  std::string target;
  std::string sft_a;
  std::string sft_b;
  std::string out = "tuneset";
};

int build_dpo(const Globals& g, const BuildDpo& o) {
  const Party target = require_party(o.target);
  auto a = read_sft(g.at(o.sft_a));
  auto b = read_sft(g.at(o.sft_b));
  if (a.empty() || b.empty()) throw ConfigError("SFT inputs must not be empty");
  if (a.front().party != target) std::swap(a, b);
  if (a.front().party != target || b.front().party == target)
    throw ConfigError("need one " + std::string(to_string(target)) + " SFT file and one opposing file");

  PairingStats stats;
  const auto pairs = build_preference_pairs(a, b, &stats);
  const auto out = g.at(o.out);
  fs::create_directories(out);
  const auto path = out / ("dpo-" + lower(to_string(target)) + ".jsonl");
  export_dpo(path, pairs);
  std::printf("%zu pairs written to %s (%d unmatched, %d identical dropped)\n", pairs.size(),
              path.string().c_str(), stats.missing, stats.identical);
  return 0;
}

// --- probe -------------------------------------------------------------------

int probe(const Globals& g, const std::string& backend) {
  auto gateway = open_gateway(g, backend);
  const auto report = gateway->probe();
  ordered_json j;
  j["status"] = to_string(report.status);
  j["latency_ms"] = static_cast<double>(report.latency.count()) / 1000.0;
  j["model"] = report.model;
  j["message"] = report.message;
  std::printf("%s\n", j.dump().c_str());
  return report.healthy() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persona-driven LLM debate simulations, attitude analysis and tuning sets."};
  app.require_subcommand(1);
  Globals g;
  std::int64_t seed = 0;
  app.add_option("--workdir", g.workdir, "Base directory for relative paths")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Seed override (persona sampling, campaign base seed)");
  app.add_option("--parallelism", g.parallelism, "Concurrent workers")->check(CLI::PositiveNumber)->capture_default_str();

  GenPersonas gp;
  auto* cmd_gp = app.add_subcommand("gen-personas", "Generate a roster of partisan personas");
  cmd_gp->add_option("--party", gp.party, "republican or democrat")->required();
  cmd_gp->add_option("--count", gp.count, "Roster size")->capture_default_str();
  cmd_gp->add_option("--out", gp.out, "Roster file (JSON lines)");
  cmd_gp->add_option("--backend-config", gp.backend, "Backend config file")->required();

  RunExperiment re;
  auto* cmd_re = app.add_subcommand("run-experiment", "Run a debate campaign");
  cmd_re->add_option("--spec", re.spec, "Experiment spec file")->required();
  cmd_re->add_option("--backend-config", re.backend, "Backend config file")->required();
  cmd_re->add_option("--out", re.out, "Campaign directory")->capture_default_str();
  cmd_re->add_flag("--rerun-failed", re.rerun_failed, "Rerun runs recorded as failed");

  Analyze an;
  auto* cmd_an = app.add_subcommand("analyze", "Aggregate attitude curves and reports");
  cmd_an->add_option("--campaign", an.campaign, "Campaign directory");
  cmd_an->add_option("--baseline-campaign", an.baseline_campaign, "Campaign supplying the Default baseline");
  cmd_an->add_option("--before", an.before, "Campaign before fine-tuning");
  cmd_an->add_option("--after", an.after, "Campaign after fine-tuning");
  cmd_an->add_option("--margin", an.margin, "Echo-chamber verdict margin")->capture_default_str();
  cmd_an->add_option("--out", an.out, "Output directory")->capture_default_str();

  BuildTuneset bt;
  auto* cmd_bt = app.add_subcommand("build-tuneset", "Expand questions and harvest SFT examples");
  cmd_bt->add_option("--party", bt.party, "republican or democrat")->required();
  cmd_bt->add_option("--persona", bt.persona, "Roster file holding the harvesting persona")->required();
  cmd_bt->add_option("--persona-id", bt.persona_id, "Persona id (default: first of the party)");
  cmd_bt->add_option("--backend-config", bt.backend, "Backend config file")->required();
  cmd_bt->add_option("--samples", bt.samples, "Samples per question")->check(CLI::PositiveNumber)->capture_default_str();
  cmd_bt->add_option("--out", bt.out, "Output directory")->capture_default_str();

  BuildDpo bd;
  auto* cmd_bd = app.add_subcommand("build-dpo", "Pair two SFT files into preference data");
  cmd_bd->add_option("--target", bd.target, "Party whose answers are chosen")->required();
  cmd_bd->add_option("--sft-a", bd.sft_a, "SFT file")->required();
  cmd_bd->add_option("--sft-b", bd.sft_b, "SFT file")->required();
  cmd_bd->add_option("--out", bd.out, "Output directory")->capture_default_str();

  std::string probe_backend_config;
  auto* cmd_pr = app.add_subcommand("probe", "Check that a backend answers");
  cmd_pr->add_option("--backend-config", probe_backend_config, "Backend config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*cmd_gp) return gen_personas(g, gp);
    if (*cmd_re) return run_experiment(g, re);
    if (*cmd_an) return analyze(g, an);
    if (*cmd_bt) return build_tuneset(g, bt);
    if (*cmd_bd) return build_dpo(g, bd);
    if (*cmd_pr) return probe(g, probe_backend_config);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
