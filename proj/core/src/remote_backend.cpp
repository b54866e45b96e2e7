#include <httplib.h>
#include <json.hpp>

#include <cstdlib>

#include "debatelab/errors.hpp"
#include "debatelab/gateway.hpp"

namespace debatelab {

namespace {

using json = nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // full request path
};

Endpoint resolve_endpoint(const std::string& url, ApiStyle style) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint_url needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  std::string base = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();
  const std::string_view suffix = style == ApiStyle::Chat ? "/chat/completions" : "/completions";
  if (base.size() >= suffix.size() && base.ends_with(suffix)) {
    ep.path = base;
  } else if (base.ends_with("/v1")) {
    ep.path = base + std::string(suffix);
  } else {
    ep.path = base + "/v1" + std::string(suffix);
  }
  return ep;
}

class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(const BackendSpec& spec)
      : spec_(spec), endpoint_(resolve_endpoint(spec.endpoint_url, spec.api_style)) {}

  BackendReply generate(const CompletionRequest& request,
                        std::chrono::milliseconds timeout) override {
    json body;
    body["model"] = spec_.model_name;
    if (spec_.api_style == ApiStyle::Chat) {
      body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
    } else {
      body["prompt"] = request.prompt;
    }
    body["temperature"] = request.params.temperature;
    body["max_tokens"] = request.params.max_tokens;
    if (!request.params.stop_sequences.empty()) body["stop"] = request.params.stop_sequences;

    httplib::Client client(endpoint_.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!spec_.auth_token_env_var.empty()) {
      if (const char* token = std::getenv(spec_.auth_token_env_var.c_str()); token && *token)
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    auto res = client.Post(endpoint_.path, headers, body.dump(), "application/json");
    if (!res) {
      throw TransportError("request to " + endpoint_.origin + endpoint_.path +
                               " failed: " + httplib::to_string(res.error()),
                           0, true);
    }
    const int status = res->status;
    if (status == 401 || status == 403)
      throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(status) + ")", status);
    if (status == 429 || status >= 500)
      throw TransportError("transient HTTP " + std::to_string(status) + ": " + res->body, status,
                           true);
    if (status != 200)
      throw TransportError("HTTP " + std::to_string(status) + ": " + res->body, status, false);

    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed completion body: ") + e.what(), status, false);
    }
    BackendReply out;
    out.model = reply.value("model", std::string());
    const auto& choices = reply.contains("choices") ? reply["choices"] : json();
    if (!choices.is_array() || choices.empty())
      throw TransportError("completion body has no choices", status, false);
    const auto& first = choices.front();
    if (spec_.api_style == ApiStyle::Chat) {
      if (first.contains("message") && first["message"].contains("content") &&
          first["message"]["content"].is_string())
        out.text = first["message"]["content"].get<std::string>();
    } else if (first.contains("text") && first["text"].is_string()) {
      out.text = first["text"].get<std::string>();
    }
    return out;
  }

 private:
  BackendSpec spec_;
  Endpoint endpoint_;
};

}  // namespace

std::unique_ptr<Backend> make_remote_backend(const BackendSpec& spec) {
  return std::make_unique<RemoteBackend>(spec);
}

}  // namespace debatelab
