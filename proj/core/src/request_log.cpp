#include "debatelab/request_log.hpp"

#include "debatelab/errors.hpp"

namespace debatelab {

RequestLog::RequestLog(const std::filesystem::path& path, bool truncate) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, truncate ? std::ios::out | std::ios::trunc : std::ios::out | std::ios::app);
  if (!out_) throw Error("cannot open request log " + path.string());
}

void RequestLog::append(std::string line) {
  std::lock_guard lock(mu_);
  if (out_.is_open()) out_ << line << '\n';
  lines_.push_back(std::move(line));
}

void RequestLog::append_all(const RequestLog& other) {
  if (&other == this) return;
  for (auto& line : other.lines()) append(std::move(line));
}

std::vector<std::string> RequestLog::lines() const {
  std::lock_guard lock(mu_);
  return lines_;
}

std::size_t RequestLog::size() const {
  std::lock_guard lock(mu_);
  return lines_.size();
}

void RequestLog::flush() {
  std::lock_guard lock(mu_);
  if (out_.is_open()) out_.flush();
}

}  // namespace debatelab
