#include "debatelab/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include <json.hpp>

#include "debatelab/errors.hpp"
#include "debatelab/scripted.hpp"

namespace debatelab {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string trim(std::string_view s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  return std::string(b, e);
}

ordered_json params_json(const GenerationParams& p) {
  ordered_json j;
  j["temperature"] = p.temperature;
  j["max_tokens"] = p.max_tokens;
  j["stop"] = p.stop_sequences;
  j["seed"] = p.seed ? ordered_json(*p.seed) : ordered_json(nullptr);
  return j;
}

struct Attempt {
  int number = 0;
  std::int64_t started_us = 0;
  std::int64_t finished_us = 0;
  std::string status;
  std::string response;
  std::string error;
  int http_status = 0;
};

void log_attempt(const RequestContext& ctx, std::string_view prompt, const GenerationParams& params,
                 const Attempt& a) {
  if (ctx.log == nullptr) return;
  ordered_json j;
  j["kind"] = to_string(ctx.kind);
  j["stream"] = ctx.stream;
  j["persona_id"] = ctx.persona_id;
  j["role"] = ctx.role;
  j["survey_index"] = ctx.survey_index;
  j["sample_index"] = ctx.sample_index;
  j["attempt"] = a.number;
  j["prompt"] = prompt;
  j["params"] = params_json(params);
  j["status"] = a.status;
  j["response"] = a.response;
  j["error"] = a.error;
  j["http_status"] = a.http_status;
  j["started_us"] = a.started_us;
  j["finished_us"] = a.finished_us;
  ctx.log->append(j.dump());
}

}  // namespace

GenerationParams GenerationParams::sampling(int max_tokens) {
  GenerationParams p;
  p.temperature = 1.0;
  p.max_tokens = max_tokens;
  return p;
}

GenerationParams GenerationParams::greedy(int max_tokens) {
  GenerationParams p;
  p.temperature = 0.0;
  p.max_tokens = max_tokens;
  return p;
}

void GenerationParams::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0))
    throw ConfigError("temperature must lie in [0, 2]");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

void BackendSpec::validate() const {
  if (kind == BackendKind::Remote && endpoint_url.empty())
    throw ConfigError("remote backend requires endpoint_url");
  if (kind == BackendKind::Scripted && !script)
    throw ConfigError("scripted backend requires a script");
  if (max_retries < 0) throw ConfigError("max_retries must be non-negative");
  if (max_concurrent_requests <= 0) throw ConfigError("max_concurrent_requests must be positive");
  if (request_timeout.count() <= 0) throw ConfigError("request_timeout must be positive");
}

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::Remote ? "remote" : "scripted";
}

std::string_view to_string(ApiStyle style) {
  return style == ApiStyle::Chat ? "chat" : "completions";
}

std::string_view to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::Generic: return "generic";
    case RequestKind::Reply: return "reply";
    case RequestKind::Survey: return "survey";
    case RequestKind::Persona: return "persona";
    case RequestKind::Expansion: return "expansion";
    case RequestKind::Harvest: return "harvest";
    case RequestKind::Probe: return "probe";
  }
  return "generic";
}

std::optional<RequestKind> request_kind_from_string(std::string_view name) {
  for (auto k : {RequestKind::Generic, RequestKind::Reply, RequestKind::Survey, RequestKind::Persona,
                 RequestKind::Expansion, RequestKind::Harvest, RequestKind::Probe}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(HealthReport::Status status) {
  switch (status) {
    case HealthReport::Status::Healthy: return "healthy";
    case HealthReport::Status::AuthFailed: return "auth_failed";
    case HealthReport::Status::Unreachable: return "unreachable";
    case HealthReport::Status::Error: return "error";
  }
  return "error";
}

std::string strip_stop_sequences(std::string_view text, std::span<const std::string> stops) {
  std::size_t cut = text.size();
  for (const auto& stop : stops) {
    if (stop.empty()) continue;
    cut = std::min(cut, text.find(stop));
  }
  return std::string(text.substr(0, cut));
}

// Holds one of the gateway's concurrency slots for its lifetime.
class Gateway::Slot {
 public:
  explicit Slot(Gateway& g) : g_(g) {
    std::unique_lock lock(g_.slots_mu_);
    g_.slots_cv_.wait(lock, [&] { return g_.in_flight_.load() < g_.spec_.max_concurrent_requests; });
    const int now = ++g_.in_flight_;
    int seen = g_.max_in_flight_.load();
    while (now > seen && !g_.max_in_flight_.compare_exchange_weak(seen, now)) {
    }
  }
  ~Slot() {
    {
      std::lock_guard lock(g_.slots_mu_);
      --g_.in_flight_;
    }
    g_.slots_cv_.notify_one();
  }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  Gateway& g_;
};

Gateway::Gateway(BackendSpec spec, std::unique_ptr<Backend> backend,
                 std::shared_ptr<const Clock> clock)
    : spec_(std::move(spec)), backend_(std::move(backend)), clock_(std::move(clock)) {
  spec_.validate();
  if (!backend_) throw ConfigError("gateway requires a backend");
  if (!clock_) clock_ = system_clock();
}

std::shared_ptr<Gateway> Gateway::create(const BackendSpec& spec) {
  spec.validate();
  if (spec.kind == BackendKind::Scripted) {
    return std::make_shared<Gateway>(spec, std::make_unique<ScriptedBackend>(spec.script),
                                     fixed_clock());
  }
  return std::make_shared<Gateway>(spec, make_remote_backend(spec), system_clock());
}

std::chrono::milliseconds Gateway::backoff_delay(int retry) const {
  auto delay = spec_.backoff_initial;
  for (int i = 1; i < retry && delay < spec_.backoff_max; ++i) delay *= 2;
  return std::min(delay, spec_.backoff_max);
}

std::string Gateway::complete(std::string_view prompt, const GenerationParams& params,
                              const RequestContext& context) {
  if (prompt.empty()) throw ConfigError("prompt must be non-empty");
  params.validate();

  Slot slot(*this);
  using steady = std::chrono::steady_clock;
  const auto deadline = steady::now() + spec_.request_timeout * (spec_.max_retries + 1);
  const CompletionRequest request{prompt, params, context};

  std::string last_error = "no attempt made";
  int last_status = 0;
  for (int attempt = 0; attempt <= spec_.max_retries; ++attempt) {
    const auto remaining =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - steady::now());
    if (remaining.count() <= 0) break;

    Attempt a;
    a.number = attempt;
    a.started_us = clock_->now_us();
    try {
      auto reply = backend_->generate(request, std::min(spec_.request_timeout, remaining));
      a.finished_us = clock_->now_us();
      std::string text = trim(strip_stop_sequences(reply.text, params.stop_sequences));
      a.response = text;
      a.status = is_blank(text) ? "empty" : "ok";
      log_attempt(context, prompt, params, a);
      if (is_blank(text)) throw EmptyCompletion("backend returned an empty completion");
      return text;
    } catch (const AuthError& e) {
      a.finished_us = clock_->now_us();
      a.status = "auth_error";
      a.error = e.what();
      a.http_status = e.http_status();
      log_attempt(context, prompt, params, a);
      throw;
    } catch (const TransportError& e) {
      a.finished_us = clock_->now_us();
      a.status = "transport_error";
      a.error = e.what();
      a.http_status = e.http_status();
      log_attempt(context, prompt, params, a);
      if (!e.retriable()) throw;
      last_error = e.what();
      last_status = e.http_status();
    }
    if (attempt < spec_.max_retries) {
      const auto delay = backoff_delay(attempt + 1);
      if (steady::now() + delay >= deadline) break;
      std::this_thread::sleep_for(delay);
    }
  }
  throw TransportError("retries exhausted: " + last_error, last_status, false);
}

HealthReport Gateway::probe() {
  HealthReport report;
  const GenerationParams params = GenerationParams::greedy(1);
  RequestContext ctx;
  ctx.kind = RequestKind::Probe;
  ctx.stream = "probe";
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Slot slot(*this);
    auto reply = backend_->generate({"Say OK", params, ctx}, spec_.request_timeout);
    report.status = HealthReport::Status::Healthy;
    report.model = reply.model.empty() ? spec_.model_name : reply.model;
    report.message = "ok";
  } catch (const AuthError& e) {
    report.status = HealthReport::Status::AuthFailed;
    report.message = e.what();
  } catch (const TransportError& e) {
    report.status =
        e.http_status() == 0 ? HealthReport::Status::Unreachable : HealthReport::Status::Error;
    report.message = e.what();
  } catch (const std::exception& e) {
    report.status = HealthReport::Status::Error;
    report.message = e.what();
  }
  report.latency = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::steady_clock::now() - t0);
  return report;
}

HealthReport probe_backend(Gateway& gateway) { return gateway.probe(); }

}  // namespace debatelab
