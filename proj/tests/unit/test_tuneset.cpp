#include <doctest.h>

#include <set>

#include <json.hpp>

#include "debatelab/errors.hpp"
#include "debatelab/tuneset.hpp"
#include "test_support.hpp"

using namespace debatelab;
using namespace debatelab::testing;
using json = nlohmann::json;

namespace {

std::vector<std::string> seeds() {
  const auto s = seed_questions();
  return {s.begin(), s.end()};
}

// Each call lists ten fresh questions tagged with the per-stream call number.
ScriptedProgram expansion_program() {
  std::string list;
  for (int i = 1; i <= 10; ++i)
    list += std::to_string(i) + ". How should the country approach issue {{call}}-" + std::to_string(i) + "?\n";
  ScriptedProgram p;
  p.rules.push_back({RequestKind::Expansion, "", "", list});
  return p;
}

ScriptedProgram harvest_program() {
  ScriptedProgram p;
  p.rules.push_back({RequestKind::Harvest, "", R"(a lifelong (\w+)\.)",
                     "As a {{1}}, answer {{sample}} on {{stream}}."});
  return p;
}

QuestionSet hundred_questions() {
  QuestionSet q;
  q.seed = seeds();
  for (int i = 0; i < 90; ++i) q.expanded.push_back("Expanded question " + std::to_string(i) + "?");
  return q;
}

}  // namespace

TEST_CASE("seed questions") {
  const auto s = seed_questions();
  CHECK(s.size() == 10);
  const std::set<std::string_view> distinct(s.begin(), s.end());
  CHECK(distinct.size() == 10);
  for (const auto& q : s) CHECK_FALSE(mentions_party(q));
}

TEST_CASE("expansion prompt wording") {
  CHECK(build_expansion_prompt("Why?") ==
        "Generate 10 questions to elicit one's opinion regarding US politics. Example question: Why?. "
        "Phrase your question in a neutral way without biasing the answer");
}

TEST_CASE("numbered list parsing") {
  const auto items = parse_numbered_list(
      "Here you go:\n1. First?\n  2) \"Second?\"\n- bullet\n3.   \n10. Tenth?\nNo number.\n4.Fourth");
  CHECK(items == std::vector<std::string>{"First?", "Second?", "Tenth?", "Fourth"});
  CHECK(parse_numbered_list("").empty());
}

TEST_CASE("dedup key and party guard") {
  CHECK(question_key("  What Now? ") == question_key("what now?"));
  CHECK(mentions_party("Do Democrats agree?"));
  CHECK(mentions_party("REPUBLICAN views"));
  CHECK_FALSE(mentions_party("What about taxes?"));
}

TEST_CASE("expansion collects 90 questions in nine calls") {
  auto gw = scripted_gateway(expansion_program());
  RequestLog log;
  ExpansionOptions options;
  options.log = &log;
  const auto set = expand_questions(seeds(), *gw, options);
  CHECK(set.seed == seeds());
  CHECK(set.expanded.size() == 90);
  CHECK(set.combined().size() == 100);
  CHECK(log.size() == 9);
  std::set<std::string> keys;
  for (const auto& q : set.combined()) CHECK(keys.insert(question_key(q)).second);
  // The example question walks through the seeds in order.
  const auto lines = log.lines();
  for (std::size_t i = 0; i < lines.size(); ++i)
    CHECK(json::parse(lines[i])["prompt"] == build_expansion_prompt(seeds()[i]));
}

TEST_CASE("expansion drops seed duplicates and partisan questions") {
  ScriptedProgram p;
  std::string list = "1. " + seeds()[0] + "\n2. " + question_key(seeds()[1]) + "\n";
  list += "3. What do Democrats get wrong {{call}}?\n4. Why do Republicans win {{call}}?\n";
  for (int i = 5; i <= 10; ++i) list += std::to_string(i) + ". Neutral {{call}}-" + std::to_string(i) + "?\n";
  list += "11. Neutral {{call}}-5?\n";
  p.rules.push_back({RequestKind::Expansion, "", "", list});
  auto gw = scripted_gateway(p);
  ExpansionOptions options;
  options.target = 30;
  const auto set = expand_questions(seeds(), *gw, options);
  CHECK(set.expanded.size() == 30);
  for (const auto& q : set.expanded) {
    CHECK_FALSE(mentions_party(q));
    CHECK(q.rfind("Neutral", 0) == 0);
  }
}

TEST_CASE("expansion gives up after the attempt budget") {
  ScriptedProgram p;
  p.rules.push_back({RequestKind::Expansion, "", "", "1. The same question every time?"});
  auto gw = scripted_gateway(p);
  RequestLog log;
  ExpansionOptions options;
  options.log = &log;
  CHECK_THROWS_AS(expand_questions(seeds(), *gw, options), ExpansionExhausted);
  CHECK(log.size() == static_cast<std::size_t>(kMaxExpansionAttempts));
  CHECK_THROWS_AS(expand_questions(std::vector<std::string>{"one?"}, *gw), ConfigError);
}

TEST_CASE("harvest produces 20 samples per question") {
  const auto questions = hundred_questions();
  const auto rep = synthetic_roster(Party::Republican, 1)[0];
  auto gw = scripted_gateway(harvest_program());
  RequestLog log;
  HarvestOptions options;
  options.parallelism = 4;
  options.log = &log;
  const auto result = harvest(Party::Republican, rep, questions, *gw, options);
  CHECK(result.examples.size() == 2000);
  CHECK(result.failures.empty());
  CHECK(log.size() == 2000);
  for (std::size_t i = 0; i < result.examples.size(); ++i) {
    const auto& ex = result.examples[i];
    CHECK(ex.question_index == static_cast<int>(i / 20));
    CHECK(ex.sample_index == static_cast<int>(i % 20));
    CHECK(ex.question == questions.combined()[i / 20]);
    CHECK(ex.party == Party::Republican);
  }
  // Every prompt carries the persona story; sampling uses temperature 1.
  for (const auto& line : log.lines()) {
    const auto j = json::parse(line);
    CHECK(j["prompt"].get<std::string>().rfind(rep.background_story + "\n\nQuestion: ", 0) == 0);
    CHECK(j["params"]["temperature"] == 1.0);
  }

  // Parallel and sequential harvests agree.
  options.parallelism = 1;
  options.log = nullptr;
  CHECK(harvest(Party::Republican, rep, questions, *scripted_gateway(harvest_program()), options).examples ==
        result.examples);
}

TEST_CASE("an all-empty backend records every slot as failed") {
  ScriptedProgram p;
  p.default_response = "";
  auto gw = scripted_gateway(p);
  RequestLog log;
  HarvestOptions options;
  options.log = &log;
  const auto result =
      harvest(Party::Democrat, synthetic_roster(Party::Democrat, 1)[0], hundred_questions(), *gw, options);
  CHECK(result.examples.empty());
  CHECK(result.failures.size() == 2000);
  CHECK(log.size() == 4000);
}

TEST_CASE("harvest preconditions") {
  auto gw = scripted_gateway(harvest_program());
  const auto rep = synthetic_roster(Party::Republican, 1)[0];
  CHECK_THROWS_AS(harvest(Party::Democrat, rep, hundred_questions(), *gw), ConfigError);
  CHECK_THROWS_AS(harvest(Party::Default, default_persona(), hundred_questions(), *gw), ConfigError);
  HarvestOptions zero;
  zero.samples_per_question = 0;
  CHECK_THROWS_AS(harvest(Party::Republican, rep, hundred_questions(), *gw, zero), ConfigError);
}

TEST_CASE("SFT files are ordered and round-trip") {
  TempDir dir("sft");
  const auto rep = synthetic_roster(Party::Republican, 1)[0];
  auto examples = harvest(Party::Republican, rep, hundred_questions(), *scripted_gateway(harvest_program())).examples;
  const auto reference = examples;
  std::reverse(examples.begin(), examples.end());
  export_sft(dir / "sft.jsonl", examples);
  const auto lines = lines_of(dir / "sft.jsonl");
  REQUIRE(lines.size() == 2000);
  const auto first = json::parse(lines[0]);
  CHECK(first["question"] == reference[0].question);
  CHECK(first["party"] == "Republican");
  CHECK(first["sample_index"] == 0);
  CHECK(first["text"] == "Question: " + reference[0].question + "\nAnswer: " + reference[0].response);
  CHECK(read_sft(dir / "sft.jsonl") == reference);
  CHECK(render_training_text("Q?", "A.") == "Question: Q?\nAnswer: A.");
}

TEST_CASE("preference pairs") {
  const auto questions = hundred_questions();
  auto gw = scripted_gateway(harvest_program());
  const auto reps = harvest(Party::Republican, synthetic_roster(Party::Republican, 1)[0], questions, *gw).examples;
  auto dems = harvest(Party::Democrat, synthetic_roster(Party::Democrat, 1)[0], questions, *gw).examples;

  PairingStats stats;
  const auto pairs = build_preference_pairs(reps, dems, &stats);
  CHECK(pairs.size() == 2000);
  CHECK(stats.matched == 2000);
  CHECK(stats.missing == 0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].prompt == reps[i].question);
    CHECK(pairs[i].chosen == reps[i].response);
    CHECK(pairs[i].rejected == dems[i].response);
    CHECK(pairs[i].chosen != pairs[i].rejected);
  }

  // A slot missing on the opposing side is skipped, identical answers dropped.
  dems.erase(dems.begin() + 5);
  dems[0].response = reps[0].response;
  const auto fewer = build_preference_pairs(reps, dems, &stats);
  CHECK(fewer.size() == 1998);
  CHECK(stats.missing == 1);
  CHECK(stats.identical == 1);

  TempDir dir("dpo");
  export_dpo(dir / "dpo.jsonl", fewer);
  const auto back = read_dpo(dir / "dpo.jsonl");
  REQUIRE(back.size() == fewer.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].prompt == fewer[i].prompt);
    CHECK(back[i].chosen == fewer[i].chosen);
    CHECK(back[i].rejected == fewer[i].rejected);
  }
  CHECK(json::parse(lines_of(dir / "dpo.jsonl")[0]).size() == 3);
}

TEST_CASE("disjoint question sets cannot be paired") {
  std::vector<TuneExample> a{{"Q1?", "x", Party::Republican, 0, 0}};
  std::vector<TuneExample> b{{"Q2?", "y", Party::Democrat, 0, 0}};
  CHECK_THROWS_AS(build_preference_pairs(a, b), DisjointQuestionSets);
}

TEST_CASE("question files round-trip") {
  TempDir dir("questions");
  const auto q = hundred_questions();
  write_questions(dir / "questions.json", q);
  CHECK(read_questions(dir / "questions.json") == q);
  const auto j = json::parse(slurp(dir / "questions.json"));
  CHECK(j["schema_version"] == 1);
  CHECK(j["combined"].size() == 100);
}
