#include "debatelab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "debatelab/errors.hpp"
#include "debatelab/run_store.hpp"

namespace debatelab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

int party_rank(Party p) {
  switch (p) {
    case Party::Republican: return 0;
    case Party::Democrat: return 1;
    case Party::Default: return 2;
  }
  return 3;
}

void sort_curves(std::vector<AttitudeCurve>& curves) {
  std::sort(curves.begin(), curves.end(), [](const AttitudeCurve& a, const AttitudeCurve& b) {
    if (party_rank(a.party) != party_rank(b.party)) return party_rank(a.party) < party_rank(b.party);
    return a.role < b.role;
  });
}

// Order-independent so results do not depend on run order.
CurvePoint summarize(int checkpoint, std::vector<double> values) {
  std::sort(values.begin(), values.end());
  CurvePoint p;
  p.checkpoint = checkpoint;
  p.n = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  p.mean = sum / static_cast<double>(p.n);
  if (p.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - p.mean) * (v - p.mean);
    p.standard_error = std::sqrt(ss / static_cast<double>(p.n - 1)) / std::sqrt(static_cast<double>(p.n));
  }
  return p;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

Party party_of_role(std::string_view role) {
  if (role.starts_with("Republican")) return Party::Republican;
  if (role.starts_with("Democrat")) return Party::Democrat;
  return Party::Default;
}

std::vector<AttitudeCurve> aggregate(std::span<const RunSurveys> runs, AggregateStats* stats) {
  if (runs.empty()) throw NoCompletedRuns("no completed runs to aggregate");

  const auto grid_of = [](const RunSurveys& r) {
    std::set<int> grid;
    for (const auto& s : r.surveys) grid.insert(s.checkpoint_iteration);
    return grid;
  };
  const std::set<int> grid = grid_of(runs.front());
  AggregateStats local;
  std::map<std::string, std::map<int, std::vector<double>>> cells;
  for (const auto& run : runs) {
    if (grid_of(run) != grid)
      throw GridMismatch("run " + std::to_string(run.run_index) + " has a different checkpoint grid");
    for (const auto& s : run.surveys) {
      auto& cell = cells[s.role][s.checkpoint_iteration];
      if (s.score) {
        cell.push_back(*s.score);
      } else {
        ++local.unparsed_excluded;
      }
    }
  }
  local.runs_used = static_cast<int>(runs.size());

  std::vector<AttitudeCurve> curves;
  for (auto& [role, by_checkpoint] : cells) {
    AttitudeCurve curve;
    curve.role = role;
    curve.party = party_of_role(role);
    for (int checkpoint : grid) {
      auto& values = by_checkpoint[checkpoint];
      if (values.empty()) {
        ++local.omitted_points;
        continue;
      }
      curve.points.push_back(summarize(checkpoint, std::move(values)));
      if (curve.points.back().n == 1) ++local.single_sample_points;
    }
    curves.push_back(std::move(curve));
  }
  sort_curves(curves);
  if (stats != nullptr) *stats = local;
  return curves;
}

std::vector<RunSurveys> load_completed_surveys(const Campaign& campaign) {
  std::vector<RunSurveys> out;
  for (const auto& r : campaign.runs) {
    if (r.status != RunStatus::Completed) continue;
    out.push_back({r.index, read_surveys(campaign.root / r.dir / "surveys.jsonl")});
  }
  return out;
}

std::vector<AttitudeCurve> aggregate(const Campaign& campaign, AggregateStats* stats) {
  const auto runs = load_completed_surveys(campaign);
  return aggregate(std::span<const RunSurveys>(runs), stats);
}

const AttitudeCurve* find_curve(std::span<const AttitudeCurve> curves, std::string_view role) {
  for (const auto& c : curves)
    if (c.role == role) return &c;
  return nullptr;
}

double default_baseline(std::span<const AttitudeCurve> curves) {
  for (const auto& c : curves) {
    if (c.party != Party::Default) continue;
    for (const auto& p : c.points)
      if (p.checkpoint == 0) return p.mean;
  }
  throw MissingRole("no Default curve with a checkpoint-0 point");
}

std::string_view to_string(Trend trend) {
  switch (trend) {
    case Trend::Converging: return "converging";
    case Trend::Diverging: return "diverging";
    case Trend::Steady: return "steady";
  }
  return "steady";
}

ConvergenceReport convergence_report(std::span<const AttitudeCurve> curves, double baseline) {
  const auto has = [&](Party p) {
    return std::any_of(curves.begin(), curves.end(),
                       [&](const AttitudeCurve& c) { return c.party == p && !c.points.empty(); });
  };
  if (!has(Party::Republican)) throw MissingRole("convergence report needs a Republican curve");
  if (!has(Party::Democrat)) throw MissingRole("convergence report needs a Democrat curve");

  ConvergenceReport report;
  report.default_baseline = baseline;
  for (const auto& c : curves) {
    if (c.points.empty()) continue;
    RoleConvergence rc;
    rc.role = c.role;
    rc.party = c.party;
    rc.initial = c.points.front().mean;
    rc.final = c.points.back().mean;
    rc.total_shift = rc.final - rc.initial;
    bool above = false;
    bool below = false;
    rc.distance_non_increasing = true;
    for (const auto& p : c.points) {
      const double d = std::abs(p.mean - baseline);
      if (!rc.distance_to_default.empty() && d > rc.distance_to_default.back().second)
        rc.distance_non_increasing = false;
      rc.distance_to_default.emplace_back(p.checkpoint, d);
      const int s = sign_of(p.mean - baseline);
      above |= s > 0;
      below |= s < 0;
    }
    rc.crossed_default = above && below;
    const double d0 = rc.distance_to_default.front().second;
    const double d1 = rc.distance_to_default.back().second;
    rc.trend = d1 < d0 ? Trend::Converging : (d1 > d0 ? Trend::Diverging : Trend::Steady);
    if (c.points.size() >= 2 && rc.total_shift != 0.0)
      rc.first_cycle_shift_share = std::abs(c.points[1].mean - c.points[0].mean) / std::abs(rc.total_shift);
    report.roles.push_back(std::move(rc));
  }
  return report;
}

std::string_view to_string(EchoVerdict verdict) {
  switch (verdict) {
    case EchoVerdict::Moderation: return "moderation";
    case EchoVerdict::Polarization: return "polarization";
    case EchoVerdict::Neutral: return "neutral";
  }
  return "neutral";
}

EchoChamberResult echo_chamber_verdict(std::span<const AttitudeCurve> curves, Party party,
                                       double baseline, double margin) {
  EchoChamberResult result;
  result.default_baseline = baseline;
  result.margin = margin;
  for (const auto& c : curves) {
    if (c.party != party || c.points.empty()) continue;
    result.members.push_back({c.role, std::abs(c.points.front().mean - baseline),
                              std::abs(c.points.back().mean - baseline)});
  }
  if (result.members.empty())
    throw MissingRole("no " + std::string(to_string(party)) + " curves in the echo-chamber campaign");

  const auto all = [&](auto pred) { return std::all_of(result.members.begin(), result.members.end(), pred); };
  if (all([&](const auto& m) { return m.final_distance < m.initial_distance - margin; })) {
    result.verdict = EchoVerdict::Moderation;
  } else if (all([&](const auto& m) { return m.final_distance > m.initial_distance + margin; })) {
    result.verdict = EchoVerdict::Polarization;
  } else {
    result.verdict = EchoVerdict::Neutral;
  }
  return result;
}

EchoChamberResult echo_chamber_test(const Campaign& campaign, double baseline, double margin) {
  if (!is_echo_chamber(campaign.spec.family))
    throw WrongFamily("echo-chamber test needs an echo-chamber campaign, got " +
                      std::string(to_string(campaign.spec.family)));
  if (!campaign.spec.echo_party) throw ConfigError("echo-chamber campaign without echo_party");
  const auto curves = aggregate(campaign);
  return echo_chamber_verdict(curves, *campaign.spec.echo_party, baseline, margin);
}

FinetuneDelta finetune_delta(std::span<const AttitudeCurve> before, std::span<const AttitudeCurve> after) {
  if (before.size() != after.size()) throw GridMismatch("before and after have different role sets");
  FinetuneDelta out;
  double total = 0.0;
  for (const auto& b : before) {
    const AttitudeCurve* a = find_curve(after, b.role);
    if (a == nullptr) throw GridMismatch("role " + b.role + " missing after fine-tuning");
    if (a->points.size() != b.points.size())
      throw GridMismatch("role " + b.role + " has different checkpoint grids");
    RoleDeltaSummary summary;
    summary.role = b.role;
    double role_total = 0.0;
    for (std::size_t k = 0; k < b.points.size(); ++k) {
      if (a->points[k].checkpoint != b.points[k].checkpoint)
        throw GridMismatch("role " + b.role + " has different checkpoint grids");
      const double d = a->points[k].mean - b.points[k].mean;
      out.points.push_back({b.role, b.points[k].checkpoint, b.points[k].mean, a->points[k].mean, d});
      role_total += d;
      summary.final_delta = d;
    }
    if (!b.points.empty()) summary.mean_delta = role_total / static_cast<double>(b.points.size());
    summary.direction = sign_of(summary.mean_delta);
    total += role_total;
    out.roles.push_back(std::move(summary));
  }
  if (!out.points.empty()) out.mean_delta = total / static_cast<double>(out.points.size());
  out.direction = sign_of(out.mean_delta);
  return out;
}

std::string plot_data_csv(std::span<const AttitudeCurve> curves) {
  std::string out = "role,checkpoint,mean,se,n\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out += csv_field(c.role) + "," + std::to_string(p.checkpoint) + "," + fmt_double(p.mean) + "," +
             fmt_double(p.standard_error) + "," + std::to_string(p.n) + "\n";
    }
  }
  return out;
}

void export_plot_data(const fs::path& path, std::span<const AttitudeCurve> curves) {
  write_file_atomic(path, plot_data_csv(curves));
}

std::vector<AttitudeCurve> read_plot_data(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "role,checkpoint,mean,se,n")
    throw ConfigError("unexpected CSV header in " + path.string());
  std::vector<AttitudeCurve> curves;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw ConfigError("malformed CSV row in " + path.string() + ": " + line);
    if (curves.empty() || curves.back().role != f[0]) {
      curves.push_back({f[0], party_of_role(f[0]), {}});
    }
    curves.back().points.push_back({std::stoi(f[1]), std::stod(f[2]), std::stod(f[3]), std::stoi(f[4])});
  }
  return curves;
}

ordered_json to_json(const ConvergenceReport& report) {
  ordered_json j;
  j["default_baseline"] = report.default_baseline;
  ordered_json roles = ordered_json::array();
  for (const auto& r : report.roles) {
    ordered_json rj;
    rj["role"] = r.role;
    rj["party"] = to_string(r.party);
    rj["initial"] = r.initial;
    rj["final"] = r.final;
    rj["total_shift"] = r.total_shift;
    ordered_json d = ordered_json::array();
    for (const auto& [cp, dist] : r.distance_to_default) d.push_back({{"checkpoint", cp}, {"distance", dist}});
    rj["distance_to_default"] = std::move(d);
    rj["crossed_default"] = r.crossed_default;
    rj["distance_non_increasing"] = r.distance_non_increasing;
    rj["trend"] = to_string(r.trend);
    rj["first_cycle_shift_share"] =
        r.first_cycle_shift_share ? ordered_json(*r.first_cycle_shift_share) : ordered_json(nullptr);
    roles.push_back(std::move(rj));
  }
  j["roles"] = std::move(roles);
  return j;
}

ordered_json to_json(const EchoChamberResult& result) {
  ordered_json j;
  j["verdict"] = to_string(result.verdict);
  j["default_baseline"] = result.default_baseline;
  j["margin"] = result.margin;
  ordered_json members = ordered_json::array();
  for (const auto& m : result.members)
    members.push_back(
        {{"role", m.role}, {"initial_distance", m.initial_distance}, {"final_distance", m.final_distance}});
  j["members"] = std::move(members);
  return j;
}

ordered_json to_json(const FinetuneDelta& delta) {
  ordered_json j;
  ordered_json points = ordered_json::array();
  for (const auto& p : delta.points)
    points.push_back({{"role", p.role}, {"checkpoint", p.checkpoint}, {"before", p.before},
                      {"after", p.after}, {"delta", p.delta}});
  j["points"] = std::move(points);
  ordered_json roles = ordered_json::array();
  for (const auto& r : delta.roles)
    roles.push_back({{"role", r.role}, {"mean_delta", r.mean_delta}, {"final_delta", r.final_delta},
                     {"direction", r.direction}});
  j["roles"] = std::move(roles);
  j["mean_delta"] = delta.mean_delta;
  j["direction"] = delta.direction;
  return j;
}

ordered_json to_json(const AggregateStats& stats) {
  return {{"runs_used", stats.runs_used},
          {"unparsed_excluded", stats.unparsed_excluded},
          {"omitted_points", stats.omitted_points},
          {"single_sample_points", stats.single_sample_points}};
}

}  // namespace debatelab
