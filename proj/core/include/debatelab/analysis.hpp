#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "debatelab/debate.hpp"
#include "debatelab/persona.hpp"
#include "debatelab/runner.hpp"

namespace debatelab {

inline constexpr double kDefaultModerationMargin = 0.5;

struct CurvePoint {
  int checkpoint = 0;
  double mean = 0.0;
  double standard_error = 0.0;  // sample sd / sqrt(n); 0 when n == 1
  int n = 0;

  bool operator==(const CurvePoint&) const = default;
};

struct AttitudeCurve {
  std::string role;
  Party party = Party::Default;
  std::vector<CurvePoint> points;

  bool operator==(const AttitudeCurve&) const = default;
};

// Survey records of one completed run.
struct RunSurveys {
  int run_index = 0;
  std::vector<SurveyRecord> surveys;
};

struct AggregateStats {
  int runs_used = 0;
  int unparsed_excluded = 0;
  int omitted_points = 0;   // (role, checkpoint) cells with no parsed score
  int single_sample_points = 0;
};

// Party implied by a role label ("Republican 2" -> Republican).
Party party_of_role(std::string_view role);

// Per-role mean and standard error at every checkpoint. Curves are ordered
// Republican, Democrat, Default, then by role label. Throws NoCompletedRuns
// for an empty input and GridMismatch when runs disagree on checkpoints.
std::vector<AttitudeCurve> aggregate(std::span<const RunSurveys> runs, AggregateStats* stats = nullptr);
// Reads surveys.jsonl of every completed run in the campaign.
std::vector<AttitudeCurve> aggregate(const Campaign& campaign, AggregateStats* stats = nullptr);

std::vector<RunSurveys> load_completed_surveys(const Campaign& campaign);

const AttitudeCurve* find_curve(std::span<const AttitudeCurve> curves, std::string_view role);

// Mean of the Default curve at checkpoint 0. Throws MissingRole.
double default_baseline(std::span<const AttitudeCurve> curves);

enum class Trend { Converging, Diverging, Steady };

std::string_view to_string(Trend trend);

struct RoleConvergence {
  std::string role;
  Party party = Party::Default;
  double initial = 0.0;
  double final = 0.0;
  double total_shift = 0.0;
  std::vector<std::pair<int, double>> distance_to_default;  // (checkpoint, distance)
  bool crossed_default = false;
  bool distance_non_increasing = false;
  Trend trend = Trend::Steady;
  std::optional<double> first_cycle_shift_share;  // unset when total shift is 0
};

struct ConvergenceReport {
  double default_baseline = 0.0;
  std::vector<RoleConvergence> roles;
};

// Requires a Republican and a Democrat curve (MissingRole otherwise).
ConvergenceReport convergence_report(std::span<const AttitudeCurve> curves, double default_baseline);

enum class EchoVerdict { Moderation, Polarization, Neutral };

std::string_view to_string(EchoVerdict verdict);

struct EchoChamberResult {
  EchoVerdict verdict = EchoVerdict::Neutral;
  double default_baseline = 0.0;
  double margin = kDefaultModerationMargin;
  struct Member {
    std::string role;
    double initial_distance = 0.0;
    double final_distance = 0.0;
  };
  std::vector<Member> members;
};

// Moderation when every same-party curve ends closer to the baseline by
// more than `margin`; polarization when every one ends farther by more than
// `margin`; neutral otherwise.
EchoChamberResult echo_chamber_verdict(std::span<const AttitudeCurve> curves, Party party,
                                       double default_baseline,
                                       double margin = kDefaultModerationMargin);

// Throws WrongFamily unless the campaign is an echo-chamber family.
EchoChamberResult echo_chamber_test(const Campaign& campaign, double default_baseline,
                                    double margin = kDefaultModerationMargin);

struct DeltaPoint {
  std::string role;
  int checkpoint = 0;
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;  // after - before
};

struct RoleDeltaSummary {
  std::string role;
  double mean_delta = 0.0;
  double final_delta = 0.0;
  int direction = 0;  // sign of mean_delta
};

struct FinetuneDelta {
  std::vector<DeltaPoint> points;
  std::vector<RoleDeltaSummary> roles;
  double mean_delta = 0.0;
  int direction = 0;
};

// Throws GridMismatch unless both inputs have the same roles and checkpoints.
FinetuneDelta finetune_delta(std::span<const AttitudeCurve> before,
                             std::span<const AttitudeCurve> after);

// CSV columns: role,checkpoint,mean,se,n
void export_plot_data(const std::filesystem::path& path, std::span<const AttitudeCurve> curves);
std::string plot_data_csv(std::span<const AttitudeCurve> curves);
std::vector<AttitudeCurve> read_plot_data(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const ConvergenceReport& report);
nlohmann::ordered_json to_json(const EchoChamberResult& result);
nlohmann::ordered_json to_json(const FinetuneDelta& delta);
nlohmann::ordered_json to_json(const AggregateStats& stats);

}  // namespace debatelab
