#include "debatelab/clock.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace debatelab {

std::int64_t SystemClock::now_us() const {
  using namespace std::chrono;
  return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

std::shared_ptr<const Clock> system_clock() {
  static const auto clock = std::make_shared<const SystemClock>();
  return clock;
}

std::shared_ptr<const Clock> fixed_clock() {
  static const auto clock = std::make_shared<const FixedClock>(0);
  return clock;
}

std::string format_iso8601(std::int64_t us_since_epoch) {
  std::int64_t secs = us_since_epoch / 1'000'000;
  std::int64_t frac = us_since_epoch % 1'000'000;
  if (frac < 0) {
    frac += 1'000'000;
    --secs;
  }
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%06lldZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<long long>(frac));
  return buf;
}

}  // namespace debatelab
