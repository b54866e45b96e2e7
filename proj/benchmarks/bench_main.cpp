#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "debatelab/analysis.hpp"
#include "debatelab/attitude.hpp"
#include "debatelab/debate.hpp"
#include "debatelab/scripted.hpp"

using namespace debatelab;

static void BM_ParseRating(benchmark::State& state) {
  const std::vector<std::string> inputs{
      "8", "I would rate it 7.5 out of 10.", "-3, no, 11, no: 6", "1,000 people think 4", "No number here at all."};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_rating(inputs[i++ % inputs.size()]));
  }
}
BENCHMARK(BM_ParseRating);

static void BM_Aggregate(benchmark::State& state) {
  const int runs = static_cast<int>(state.range(0));
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> grid(0, 20);
  std::vector<RunSurveys> data;
  for (int r = 0; r < runs; ++r) {
    RunSurveys rs{r, {}};
    for (const auto* role : {"Republican", "Democrat", "Default"})
      for (int cp : {0, 3, 6, 9}) {
        SurveyRecord s;
        s.role = role;
        s.checkpoint_iteration = cp;
        s.score = grid(rng) * 0.5;
        rs.surveys.push_back(s);
      }
    data.push_back(std::move(rs));
  }
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(data));
}
BENCHMARK(BM_Aggregate)->Arg(40)->Arg(400);

static void BM_ScriptedDebate(benchmark::State& state) {
  auto program = std::make_shared<ScriptedProgram>();
  program->rules.push_back({RequestKind::Reply, "", "", "Reply {{call}} in {{stream}}."});
  program->rating_function = rating::hashed(0, 10, 0.5, 3);
  BackendSpec spec;
  spec.script = program;
  auto gateway = Gateway::create(spec);

  DebateConfig config;
  config.topic = topic(TopicKey::ClimateChange);
  config.participants = {
      {{"republican-000", "Andrew", Party::Republican, "I am Andrew, a Republican."}, "Republican"},
      {{"democrat-000", "Amelia", Party::Democrat, "I am Amelia, a Democrat."}, "Democrat"},
      {default_persona("default-000"), "Default"},
  };
  config.cycles = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    config.debate_id = "bench-" + std::to_string(seed);
    config.rng_seed = seed++;
    benchmark::DoNotOptimize(run_debate(config, *gateway));
  }
}
BENCHMARK(BM_ScriptedDebate)->Arg(3)->Arg(10);

BENCHMARK_MAIN();
