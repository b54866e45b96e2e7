#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "debatelab/clock.hpp"
#include "debatelab/request_log.hpp"

namespace debatelab {

struct ScriptedProgram;

struct GenerationParams {
  double temperature = 1.0;
  int max_tokens = 256;
  std::vector<std::string> stop_sequences;
  // Only honoured by the scripted backend.
  std::optional<std::int64_t> seed;

  // Temperature 1.0, used for debate replies, personas and question/response generation.
  static GenerationParams sampling(int max_tokens);
  // Temperature 0.0, used for surveys.
  static GenerationParams greedy(int max_tokens);

  void validate() const;
};

enum class BackendKind { Remote, Scripted };
enum class ApiStyle { Completions, Chat };

struct BackendSpec {
  BackendKind kind = BackendKind::Scripted;
  std::string endpoint_url;
  std::string model_name = "scripted";
  std::string auth_token_env_var = "OPENAI_API_KEY";
  std::chrono::milliseconds request_timeout{60'000};
  int max_retries = 3;
  int max_concurrent_requests = 4;
  // Chat endpoints get the prompt wrapped as a single user message.
  ApiStyle api_style = ApiStyle::Completions;
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{8'000};
  std::shared_ptr<const ScriptedProgram> script;

  void validate() const;
};

std::string_view to_string(BackendKind kind);
std::string_view to_string(ApiStyle style);

enum class RequestKind { Generic, Reply, Survey, Persona, Expansion, Harvest, Probe };

std::string_view to_string(RequestKind kind);
std::optional<RequestKind> request_kind_from_string(std::string_view name);

// Caller-side metadata attached to a completion. It never reaches a remote
// endpoint; the scripted backend and the request log use it.
struct RequestContext {
  RequestKind kind = RequestKind::Generic;
  // Identifies a sequential stream of calls (one debate, one question...).
  std::string stream;
  std::string persona_id;
  std::string role;
  int survey_index = -1;
  int survey_attempt = 0;
  int sample_index = -1;
  RequestLog* log = nullptr;
};

struct CompletionRequest {
  std::string_view prompt;
  const GenerationParams& params;
  const RequestContext& context;
};

struct BackendReply {
  std::string text;
  std::string model;
};

// A wire adapter. Implementations throw TransportError (retriable or not)
// or AuthError; retries, stop-sequence handling and logging live in Gateway.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply generate(const CompletionRequest& request,
                                std::chrono::milliseconds timeout) = 0;
};

struct HealthReport {
  enum class Status { Healthy, AuthFailed, Unreachable, Error };

  Status status = Status::Error;
  std::chrono::microseconds latency{0};
  std::string model;
  std::string message;

  bool healthy() const { return status == Status::Healthy; }
};

std::string_view to_string(HealthReport::Status status);

// Truncates `text` at the earliest occurrence of any stop sequence.
std::string strip_stop_sequences(std::string_view text, std::span<const std::string> stops);

// Shareable handle over one backend: bounds in-flight requests, retries
// transient failures with exponential backoff, strips stop sequences and
// logs every attempt.
class Gateway {
 public:
  Gateway(BackendSpec spec, std::unique_ptr<Backend> backend, std::shared_ptr<const Clock> clock);

  // Builds the backend named by spec.kind. Scripted gateways use a fixed clock.
  static std::shared_ptr<Gateway> create(const BackendSpec& spec);

  // Throws EmptyCompletion when the backend returns only whitespace,
  // TransportError once retries are exhausted, AuthError immediately.
  std::string complete(std::string_view prompt, const GenerationParams& params,
                       const RequestContext& context = {});

  HealthReport probe();

  const BackendSpec& spec() const { return spec_; }
  const Clock& clock() const { return *clock_; }
  std::shared_ptr<const Clock> clock_ptr() const { return clock_; }

  int in_flight() const { return in_flight_.load(); }
  int max_in_flight_observed() const { return max_in_flight_.load(); }

  // Backoff before retry number `retry` (1-based).
  std::chrono::milliseconds backoff_delay(int retry) const;

 private:
  class Slot;

  BackendSpec spec_;
  std::unique_ptr<Backend> backend_;
  std::shared_ptr<const Clock> clock_;

  std::mutex slots_mu_;
  std::condition_variable slots_cv_;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

HealthReport probe_backend(Gateway& gateway);

std::unique_ptr<Backend> make_remote_backend(const BackendSpec& spec);

}  // namespace debatelab
