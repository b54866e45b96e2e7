#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "debatelab/errors.hpp"
#include "debatelab/gateway.hpp"

using namespace debatelab;
using json = nlohmann::json;

namespace {

// Minimal OpenAI-compatible server. Behaviour is steered per test.
class FakeEndpoint {
 public:
  FakeEndpoint() {
    const auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++in_flight_;
      int seen = max_in_flight.load();
      while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
      }
      {
        std::lock_guard lock(mu);
        last_body = json::parse(req.body);
        last_auth = req.get_header_value("Authorization");
        last_path = req.path;
      }
      const int call = calls++;
      if (delay.count() > 0) std::this_thread::sleep_for(delay);
      --in_flight_;
      if (!expected_token.empty() && last_auth != "Bearer " + expected_token) {
        res.status = 401;
        res.set_content(R"({"error":"bad key"})", "application/json");
        return;
      }
      if (call < fail_first) {
        res.status = fail_status;
        res.set_content(R"({"error":"busy"})", "application/json");
        return;
      }
      json body;
      body["model"] = "echo-model";
      if (req.path.find("chat") != std::string::npos) {
        body["choices"] = json::array({{{"message", {{"role", "assistant"}, {"content", reply}}}}});
      } else {
        body["choices"] = json::array({{{"text", reply}}});
      }
      res.set_content(body.dump(), "application/json");
    };
    server_.Post("/v1/completions", handler);
    server_.Post("/v1/chat/completions", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::mutex mu;
  json last_body;
  std::string last_auth;
  std::string last_path;
  std::string reply = " Hello there.";
  std::string expected_token;
  int fail_first = 0;
  int fail_status = 503;
  std::chrono::milliseconds delay{0};
  std::atomic<int> calls{0};
  std::atomic<int> max_in_flight{0};

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> in_flight_{0};
};

BackendSpec spec_for(const std::string& url) {
  BackendSpec spec;
  spec.kind = BackendKind::Remote;
  spec.endpoint_url = url;
  spec.model_name = "test-model";
  spec.auth_token_env_var = "DEBATELAB_TEST_TOKEN";
  spec.request_timeout = std::chrono::milliseconds(2000);
  spec.max_retries = 2;
  spec.backoff_initial = std::chrono::milliseconds(5);
  spec.backoff_max = std::chrono::milliseconds(20);
  return spec;
}

}  // namespace

TEST_CASE("completions wire format and bearer auth") {
  FakeEndpoint server;
  server.expected_token = "sekret";
  ::setenv("DEBATELAB_TEST_TOKEN", "sekret", 1);
  auto gw = Gateway::create(spec_for(server.url()));
  auto params = GenerationParams::sampling(120);
  params.stop_sequences = {"\nAndrew:"};
  CHECK(gw->complete("Amelia:", params) == "Hello there.");
  std::lock_guard lock(server.mu);
  CHECK(server.last_path == "/v1/completions");
  CHECK(server.last_auth == "Bearer sekret");
  CHECK(server.last_body["model"] == "test-model");
  CHECK(server.last_body["prompt"] == "Amelia:");
  CHECK(server.last_body["temperature"] == 1.0);
  CHECK(server.last_body["max_tokens"] == 120);
  CHECK(server.last_body["stop"] == json::array({"\nAndrew:"}));
}

TEST_CASE("chat endpoints receive the prompt as one user message") {
  FakeEndpoint server;
  auto spec = spec_for(server.url() + "/v1");
  spec.api_style = ApiStyle::Chat;
  auto gw = Gateway::create(spec);
  CHECK(gw->complete("Rate it.", GenerationParams::greedy(8)) == "Hello there.");
  std::lock_guard lock(server.mu);
  CHECK(server.last_path == "/v1/chat/completions");
  CHECK(server.last_body["messages"] == json::array({{{"role", "user"}, {"content", "Rate it."}}}));
  CHECK(server.last_body["temperature"] == 0.0);
}

TEST_CASE("HTTP 429 and 5xx are retried") {
  FakeEndpoint server;
  server.fail_first = 2;
  server.fail_status = 429;
  auto gw = Gateway::create(spec_for(server.url()));
  CHECK(gw->complete("x", GenerationParams::greedy(4)) == "Hello there.");
  CHECK(server.calls == 3);

  FakeEndpoint down;
  down.fail_first = 100;
  down.fail_status = 502;
  auto gw2 = Gateway::create(spec_for(down.url()));
  CHECK_THROWS_AS(gw2->complete("x", GenerationParams::greedy(4)), TransportError);
  CHECK(down.calls == 3);
}

TEST_CASE("other 4xx responses fail without retry") {
  FakeEndpoint server;
  server.fail_first = 100;
  server.fail_status = 400;
  auto gw = Gateway::create(spec_for(server.url()));
  CHECK_THROWS_AS(gw->complete("x", GenerationParams::greedy(4)), TransportError);
  CHECK(server.calls == 1);
}

TEST_CASE("wrong token surfaces AuthError and an auth_failed probe") {
  FakeEndpoint server;
  server.expected_token = "right";
  ::setenv("DEBATELAB_TEST_TOKEN", "wrong", 1);
  auto gw = Gateway::create(spec_for(server.url()));
  CHECK_THROWS_AS(gw->complete("x", GenerationParams::greedy(4)), AuthError);
  CHECK(server.calls == 1);
  const auto report = probe_backend(*gw);
  CHECK(report.status == HealthReport::Status::AuthFailed);
  CHECK_FALSE(report.healthy());
}

TEST_CASE("probe reports the echoed model name") {
  FakeEndpoint server;
  auto gw = Gateway::create(spec_for(server.url()));
  const auto report = probe_backend(*gw);
  CHECK(report.healthy());
  CHECK(report.model == "echo-model");
}

TEST_CASE("unreachable endpoint: probe reports, complete throws after retries") {
  int port = 0;
  {
    httplib::Server tmp;
    port = tmp.bind_to_any_port("127.0.0.1");
  }
  auto spec = spec_for("http://127.0.0.1:" + std::to_string(port));
  spec.request_timeout = std::chrono::milliseconds(300);
  auto gw = Gateway::create(spec);
  HealthReport report;
  CHECK_NOTHROW(report = probe_backend(*gw));
  CHECK(report.status == HealthReport::Status::Unreachable);
  CHECK_THROWS_AS(gw->complete("x", GenerationParams::greedy(4)), TransportError);
}

TEST_CASE("a hung endpoint is bounded by timeout x (retries + 1)") {
  FakeEndpoint server;
  server.delay = std::chrono::milliseconds(1500);
  auto spec = spec_for(server.url());
  spec.request_timeout = std::chrono::milliseconds(200);
  spec.max_retries = 1;
  auto gw = Gateway::create(spec);
  const auto t0 = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(gw->complete("x", GenerationParams::greedy(4)), TransportError);
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  // 200 ms x 2 attempts, plus scheduling slack
  CHECK(elapsed < std::chrono::milliseconds(1000));
}

TEST_CASE("in-flight requests never exceed max_concurrent_requests") {
  FakeEndpoint server;
  server.delay = std::chrono::milliseconds(30);
  auto spec = spec_for(server.url());
  spec.max_concurrent_requests = 2;
  auto gw = Gateway::create(spec);
  RequestLog log;
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 6; ++t)
      threads.emplace_back([&] {
        RequestContext ctx;
        ctx.log = &log;
        for (int i = 0; i < 2; ++i) gw->complete("x", GenerationParams::greedy(4), ctx);
      });
  }
  CHECK(server.max_in_flight <= 2);
  CHECK(gw->max_in_flight_observed() <= 2);

  // Overlap analysis over the request log: at no instant are more than two
  // [started_us, finished_us] intervals open.
  std::vector<std::pair<std::int64_t, int>> events;
  for (const auto& line : log.lines()) {
    const auto j = json::parse(line);
    events.emplace_back(j["started_us"].get<std::int64_t>(), +1);
    events.emplace_back(j["finished_us"].get<std::int64_t>(), -1);
  }
  std::sort(events.begin(), events.end(), [](auto a, auto b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  int open = 0;
  int peak = 0;
  for (const auto& [t, d] : events) {
    open += d;
    peak = std::max(peak, open);
  }
  CHECK(log.size() == 12);
  CHECK(peak <= 2);
}
