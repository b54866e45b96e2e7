#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace debatelab {

// Source of wall-clock timestamps for logs and manifests. Scripted runs use
// FixedClock so that every artifact they write is byte-reproducible.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_us() const = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_us() const override;
};

class FixedClock final : public Clock {
 public:
  explicit FixedClock(std::int64_t us = 0) : us_(us) {}
  std::int64_t now_us() const override { return us_; }

 private:
  std::int64_t us_;
};

std::shared_ptr<const Clock> system_clock();
std::shared_ptr<const Clock> fixed_clock();

// "2024-01-31T12:00:00.123456Z"
std::string format_iso8601(std::int64_t us_since_epoch);

}  // namespace debatelab
