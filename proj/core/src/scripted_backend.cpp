#include "debatelab/scripted.hpp"

#include <cmath>
#include <cstdio>

#include "debatelab/errors.hpp"

namespace debatelab {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

struct TemplateVars {
  std::string_view prompt;
  int call = 0;
  const RequestContext* ctx = nullptr;
  const std::smatch* groups = nullptr;
};

// Single pass so that substituted text (e.g. an echoed prompt) is never re-expanded.
std::string render(std::string_view tmpl, const TemplateVars& v) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(i, open - i));
    const auto name = tmpl.substr(open + 2, close - open - 2);
    if (name == "prompt") {
      out.append(v.prompt);
    } else if (name == "call") {
      out += std::to_string(v.call);
    } else if (name == "sample") {
      out += std::to_string(v.ctx->sample_index);
    } else if (name == "survey") {
      out += std::to_string(v.ctx->survey_index);
    } else if (name == "persona") {
      out += v.ctx->persona_id;
    } else if (name == "role") {
      out += v.ctx->role;
    } else if (name == "stream") {
      out += v.ctx->stream;
    } else if (name.size() == 1 && name[0] >= '1' && name[0] <= '9') {
      const auto g = static_cast<std::size_t>(name[0] - '0');
      if (v.groups != nullptr && g < v.groups->size()) out += (*v.groups)[g].str();
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    i = close + 2;
  }
  out.append(tmpl.substr(std::min(i, tmpl.size())));
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_rating(double value) {
  const double rounded = std::round(value * 10.0) / 10.0;
  char buf[32];
  if (rounded == std::floor(rounded)) {
    std::snprintf(buf, sizeof buf, "%.0f", rounded);
  } else {
    std::snprintf(buf, sizeof buf, "%.1f", rounded);
  }
  return buf;
}

namespace rating {

RatingFunction table(std::map<std::string, std::vector<std::string>> by_role) {
  return [by_role = std::move(by_role)](const RatingQuery& q) -> std::optional<std::string> {
    const auto it = by_role.find(std::string(q.role));
    if (it == by_role.end() || it->second.empty() || q.survey_index < 0) return std::nullopt;
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(q.survey_index),
                                           it->second.size() - 1);
    return it->second[idx];
  };
}

double linear_value(const LinearTrajectory& t, int survey_index) {
  const double gap = t.target - t.start;
  const double travelled = std::min(std::abs(gap), std::abs(t.step) * survey_index);
  return t.start + (gap < 0 ? -travelled : travelled);
}

RatingFunction linear(std::map<std::string, LinearTrajectory> by_role, std::string format) {
  return [by_role = std::move(by_role),
          format = std::move(format)](const RatingQuery& q) -> std::optional<std::string> {
    const auto it = by_role.find(std::string(q.role));
    if (it == by_role.end() || q.survey_index < 0) return std::nullopt;
    std::string out = format;
    replace_all(out, "{value}", format_rating(linear_value(it->second, q.survey_index)));
    return out;
  };
}

RatingFunction hashed(double min, double max, double step, std::uint64_t seed) {
  if (!(step > 0.0) || max < min) throw ConfigError("hashed rating needs step > 0 and max >= min");
  const auto cells = static_cast<std::uint64_t>(std::llround((max - min) / step)) + 1;
  return [=](const RatingQuery& q) -> std::optional<std::string> {
    std::string key = std::to_string(seed);
    key += '\x1f';
    key += q.stream;
    key += '\x1f';
    key += q.persona_id;
    key += '\x1f';
    key += std::to_string(q.survey_index);
    const auto cell = fnv1a64(key) % cells;
    return format_rating(min + static_cast<double>(cell) * step);
  };
}

}  // namespace rating

ScriptedBackend::ScriptedBackend(std::shared_ptr<const ScriptedProgram> program)
    : program_(std::move(program)) {
  if (!program_) throw ConfigError("scripted backend requires a program");
  for (const auto& rule : program_->rules) {
    CompiledRule c{&rule, std::nullopt};
    if (!rule.pattern.empty()) {
      try {
        c.regex.emplace(rule.pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw ConfigError("invalid scripted rule pattern '" + rule.pattern + "': " + e.what());
      }
    }
    compiled_.push_back(std::move(c));
  }
}

BackendReply ScriptedBackend::generate(const CompletionRequest& request,
                                       std::chrono::milliseconds /*timeout*/) {
  return {respond(request.prompt, request.context), "scripted"};
}

std::string ScriptedBackend::respond(std::string_view prompt, const RequestContext& ctx) {
  int call = 0;
  {
    std::lock_guard lock(mu_);
    call = stream_calls_[ctx.stream]++;
  }

  if (ctx.kind == RequestKind::Survey && program_->rating_function) {
    const RatingQuery q{ctx.role, ctx.survey_index, ctx.survey_attempt, ctx.stream, ctx.persona_id};
    if (auto r = program_->rating_function(q)) return *r;
  }

  const std::string prompt_str(prompt);
  for (const auto& c : compiled_) {
    const ScriptRule& rule = *c.rule;
    if (rule.kind && *rule.kind != ctx.kind) continue;
    if (!rule.contains.empty() && prompt.find(rule.contains) == std::string_view::npos) continue;
    std::smatch m;
    if (c.regex && !std::regex_search(prompt_str, m, *c.regex)) continue;
    return render(rule.response, {prompt, call, &ctx, c.regex ? &m : nullptr});
  }
  return render(program_->default_response, {prompt, call, &ctx, nullptr});
}

}  // namespace debatelab
