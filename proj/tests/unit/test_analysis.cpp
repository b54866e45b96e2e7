#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "debatelab/analysis.hpp"
#include "debatelab/errors.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace debatelab;
using namespace debatelab::testing;

namespace {

SurveyRecord rec(const std::string& role, int cp, std::optional<double> score) {
  SurveyRecord r;
  r.persona_id = role + "-p";
  r.role = role;
  r.checkpoint_iteration = cp;
  r.score = score;
  r.raw_response = score ? format_rating(*score) : "n/a";
  return r;
}

AttitudeCurve curve(const std::string& role, std::vector<std::pair<int, double>> pts) {
  AttitudeCurve c;
  c.role = role;
  c.party = party_of_role(role);
  for (auto [cp, m] : pts) c.points.push_back({cp, m, 0.0, 1});
  return c;
}

}  // namespace

TEST_CASE("mean and standard error of one cell") {
  std::vector<RunSurveys> runs;
  for (double v : {2.0, 4.0, 6.0}) runs.push_back({static_cast<int>(runs.size()), {rec("Default", 0, v)}});
  AggregateStats stats;
  const auto curves = aggregate(runs, &stats);
  REQUIRE(curves.size() == 1);
  REQUIRE(curves[0].points.size() == 1);
  const auto& p = curves[0].points[0];
  CHECK(p.mean == 4.0);
  CHECK(p.standard_error == doctest::Approx(1.1547005383792515).epsilon(1e-15));
  CHECK(p.n == 3);
  CHECK(stats.runs_used == 3);
  CHECK(stats.single_sample_points == 0);
}

TEST_CASE("a single sample has zero standard error") {
  std::vector<RunSurveys> runs{{0, {rec("Democrat", 0, 7.5)}}};
  AggregateStats stats;
  const auto curves = aggregate(runs, &stats);
  CHECK(curves[0].points[0].standard_error == 0.0);
  CHECK(curves[0].points[0].mean == 7.5);
  CHECK(stats.single_sample_points == 1);
}

TEST_CASE("unparsed surveys are excluded and empty cells omitted") {
  std::vector<RunSurveys> runs{
      {0, {rec("Republican", 0, 3.0), rec("Republican", 3, std::nullopt), rec("Democrat", 0, 8.0),
           rec("Democrat", 3, 7.0)}},
      {1, {rec("Republican", 0, 5.0), rec("Republican", 3, std::nullopt), rec("Democrat", 0, std::nullopt),
           rec("Democrat", 3, 6.0)}},
  };
  AggregateStats stats;
  const auto curves = aggregate(runs, &stats);
  CHECK(stats.unparsed_excluded == 3);
  CHECK(stats.omitted_points == 1);
  const auto* rep = find_curve(curves, "Republican");
  REQUIRE(rep != nullptr);
  REQUIRE(rep->points.size() == 1);
  CHECK(rep->points[0].checkpoint == 0);
  CHECK(rep->points[0].mean == 4.0);
  const auto* dem = find_curve(curves, "Democrat");
  REQUIRE(dem->points.size() == 2);
  CHECK(dem->points[0].n == 1);
  CHECK(dem->points[1].mean == 6.5);
}

TEST_CASE("aggregation is independent of run order") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> grid(0, 100);
  std::vector<RunSurveys> runs;
  for (int r = 0; r < 40; ++r) {
    RunSurveys rs{r, {}};
    for (const auto* role : {"Republican", "Democrat", "Default"})
      for (int cp : {0, 3, 6, 9}) rs.surveys.push_back(rec(role, cp, grid(rng) / 10.0));
    runs.push_back(std::move(rs));
  }
  const auto reference = aggregate(runs);
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(runs.begin(), runs.end(), rng);
    for (auto& r : runs) std::shuffle(r.surveys.begin(), r.surveys.end(), rng);
    CHECK(aggregate(runs) == reference);
  }
  REQUIRE(reference.size() == 3);
  CHECK(reference[0].role == "Republican");
  CHECK(reference[1].role == "Democrat");
  CHECK(reference[2].role == "Default");
}

TEST_CASE("aggregation failures") {
  std::vector<RunSurveys> none;
  CHECK_THROWS_AS(aggregate(none), NoCompletedRuns);
  std::vector<RunSurveys> mismatched{{0, {rec("Default", 0, 1.0), rec("Default", 2, 1.0)}},
                                     {1, {rec("Default", 0, 1.0), rec("Default", 3, 1.0)}}};
  CHECK_THROWS_AS(aggregate(mismatched), GridMismatch);
}

TEST_CASE("roles map to parties") {
  CHECK(party_of_role("Republican") == Party::Republican);
  CHECK(party_of_role("Republican 2") == Party::Republican);
  CHECK(party_of_role("Democrat 1") == Party::Democrat);
  CHECK(party_of_role("Default") == Party::Default);
}

TEST_CASE("campaign aggregation matches the brute-force oracle") {
  ExperimentSpec spec;
  spec.family = Family::ThreeWayCross;
  spec.topic = topic(TopicKey::Racism);
  spec.repetitions = 12;
  spec.cycles = 3;
  spec.republicans = synthetic_roster(Party::Republican, 12);
  spec.democrats = synthetic_roster(Party::Democrat, 12);
  auto hashed = rating::hashed(0, 12, 0.5, 77);  // values above 10 come back unparsed
  auto program = debate_program([hashed](const RatingQuery& q) { return hashed(q); });
  TempDir dir("agg");
  const auto campaign = execute(spec, plan_runs(spec), *scripted_gateway(program), dir.path(), {.parallelism = 4});
  AggregateStats stats;
  const auto curves = aggregate(campaign, &stats);
  const auto expected = oracle::brute_force_aggregate(dir.path());
  std::size_t cells = 0;
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      CAPTURE(c.role);
      CAPTURE(p.checkpoint);
      const auto it = expected.find({c.role, p.checkpoint});
      REQUIRE(it != expected.end());
      CHECK(p.n == it->second.n);
      CHECK(std::abs(p.mean - it->second.mean) <= 1e-9);
      CHECK(std::abs(p.standard_error - it->second.se) <= 1e-9);
      ++cells;
    }
  }
  CHECK(cells == expected.size());
  CHECK(stats.unparsed_excluded == campaign.data_quality.unparsed_surveys);
  CHECK(stats.unparsed_excluded > 0);
}

TEST_CASE("convergence toward the default baseline") {
  const std::vector<AttitudeCurve> curves{
      curve("Republican", {{0, 2.0}, {3, 4.5}, {6, 5.0}}),
      curve("Democrat", {{0, 9.0}, {3, 9.5}, {6, 10.0}}),
      curve("Default", {{0, 8.4}, {3, 8.4}, {6, 8.4}}),
  };
  CHECK(default_baseline(curves) == 8.4);
  const auto report = convergence_report(curves, 8.4);
  REQUIRE(report.roles.size() == 3);

  const auto& rep = report.roles[0];
  CHECK(rep.role == "Republican");
  REQUIRE(rep.distance_to_default.size() == 3);
  CHECK(rep.distance_to_default[0].second == doctest::Approx(6.4));
  CHECK(rep.distance_to_default[1].second == doctest::Approx(3.9));
  CHECK(rep.distance_to_default[2].second == doctest::Approx(3.4));
  CHECK_FALSE(rep.crossed_default);
  CHECK(rep.distance_non_increasing);
  CHECK(rep.trend == Trend::Converging);
  CHECK(rep.total_shift == 3.0);
  CHECK(*rep.first_cycle_shift_share == doctest::Approx(2.5 / 3.0));

  const auto& dem = report.roles[1];
  CHECK(dem.trend == Trend::Diverging);
  CHECK_FALSE(dem.distance_non_increasing);
  CHECK_FALSE(dem.crossed_default);

  const auto& def = report.roles[2];
  for (const auto& [cp, d] : def.distance_to_default) CHECK(d == 0.0);
  CHECK(def.trend == Trend::Steady);
  CHECK_FALSE(def.first_cycle_shift_share.has_value());
}

TEST_CASE("crossing the baseline is flagged") {
  const std::vector<AttitudeCurve> curves{
      curve("Republican", {{0, 7.0}, {2, 9.0}}),
      curve("Democrat", {{0, 8.4}, {2, 8.4}}),
  };
  const auto report = convergence_report(curves, 8.4);
  CHECK(report.roles[0].crossed_default);
  CHECK_FALSE(report.roles[1].crossed_default);
}

TEST_CASE("convergence needs both partisan curves") {
  const std::vector<AttitudeCurve> only_rep{curve("Republican", {{0, 1.0}})};
  CHECK_THROWS_AS(convergence_report(only_rep, 5.0), MissingRole);
  CHECK_THROWS_AS(default_baseline(only_rep), MissingRole);
}

TEST_CASE("echo-chamber verdicts") {
  const std::vector<AttitudeCurve> moderate{
      curve("Republican 1", {{0, 2.0}, {6, 6.0}}),
      curve("Republican 2", {{0, 3.0}, {6, 7.0}}),
      curve("Default", {{0, 8.0}, {6, 8.0}}),
  };
  auto r = echo_chamber_verdict(moderate, Party::Republican, 8.0);
  CHECK(r.verdict == EchoVerdict::Moderation);
  REQUIRE(r.members.size() == 2);
  CHECK(r.members[0].initial_distance == 6.0);
  CHECK(r.members[0].final_distance == 2.0);

  const std::vector<AttitudeCurve> polar{
      curve("Republican 1", {{0, 6.0}, {6, 2.0}}),
      curve("Republican 2", {{0, 7.0}, {6, 3.0}}),
  };
  CHECK(echo_chamber_verdict(polar, Party::Republican, 8.0).verdict == EchoVerdict::Polarization);

  const std::vector<AttitudeCurve> mixed{
      curve("Republican 1", {{0, 2.0}, {6, 6.0}}),
      curve("Republican 2", {{0, 7.0}, {6, 3.0}}),
  };
  CHECK(echo_chamber_verdict(mixed, Party::Republican, 8.0).verdict == EchoVerdict::Neutral);

  const std::vector<AttitudeCurve> small{
      curve("Republican 1", {{0, 2.0}, {6, 2.4}}),
      curve("Republican 2", {{0, 3.0}, {6, 3.4}}),
  };
  CHECK(echo_chamber_verdict(small, Party::Republican, 8.0).verdict == EchoVerdict::Neutral);
  CHECK(echo_chamber_verdict(small, Party::Republican, 8.0, 0.1).verdict == EchoVerdict::Moderation);
  CHECK_THROWS_AS(echo_chamber_verdict(small, Party::Democrat, 8.0), MissingRole);
}

TEST_CASE("echo-chamber test rejects cross campaigns") {
  Campaign c;
  c.spec.family = Family::TwoWayCross;
  CHECK_THROWS_AS(echo_chamber_test(c, 5.0), WrongFamily);
}

TEST_CASE("fine-tuning delta") {
  const std::vector<AttitudeCurve> before{curve("Default", {{0, 8.4}, {3, 8.0}})};
  const std::vector<AttitudeCurve> after{curve("Default", {{0, 1.9}, {3, 2.0}})};
  const auto d = finetune_delta(before, after);
  REQUIRE(d.points.size() == 2);
  CHECK(d.points[0].delta == doctest::Approx(-6.5));
  CHECK(d.points[1].delta == -6.0);
  CHECK(d.direction == -1);
  CHECK(d.roles[0].final_delta == -6.0);

  const auto back = finetune_delta(after, before);
  for (std::size_t k = 0; k < d.points.size(); ++k) CHECK(back.points[k].delta == -d.points[k].delta);
  CHECK(back.direction == 1);
  CHECK(finetune_delta(before, before).direction == 0);

  const std::vector<AttitudeCurve> other_grid{curve("Default", {{0, 1.9}, {4, 2.0}})};
  CHECK_THROWS_AS(finetune_delta(before, other_grid), GridMismatch);
  const std::vector<AttitudeCurve> other_role{curve("Democrat", {{0, 1.9}, {3, 2.0}})};
  CHECK_THROWS_AS(finetune_delta(before, other_role), GridMismatch);
}

TEST_CASE("plot data CSV") {
  TempDir dir("csv");
  const std::vector<AttitudeCurve> empty;
  export_plot_data(dir / "empty.csv", empty);
  CHECK(slurp(dir / "empty.csv") == "role,checkpoint,mean,se,n\n");
  CHECK(read_plot_data(dir / "empty.csv").empty());

  std::vector<AttitudeCurve> curves;
  for (const auto* role : {"Republican", "Democrat", "Default"}) {
    AttitudeCurve c;
    c.role = role;
    c.party = party_of_role(role);
    for (int cp : {0, 3, 6, 9}) c.points.push_back({cp, 1.0 / 3.0 + cp, std::sqrt(2.0) / 7.0, 40});
    curves.push_back(c);
  }
  export_plot_data(dir / "plot.csv", curves);
  CHECK(lines_of(dir / "plot.csv").size() == 13);
  CHECK(read_plot_data(dir / "plot.csv") == curves);

  std::ofstream(dir / "bad.csv") << "a,b\n";
  CHECK_THROWS_AS(read_plot_data(dir / "bad.csv"), ConfigError);
}
