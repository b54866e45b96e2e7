#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

namespace debatelab {

// Append-only JSON-lines log of every prompt/response exchanged with a
// backend. A log either streams straight to a file or buffers in memory;
// buffered logs are merged into a parent in a caller-chosen order so that
// parallel producers still yield a deterministic file.
class RequestLog {
 public:
  RequestLog() = default;
  explicit RequestLog(const std::filesystem::path& path, bool truncate = true);

  RequestLog(const RequestLog&) = delete;
  RequestLog& operator=(const RequestLog&) = delete;

  // `line` is one serialized JSON object without the trailing newline.
  void append(std::string line);
  void append_all(const RequestLog& other);

  // Snapshot of everything appended so far.
  std::vector<std::string> lines() const;
  std::size_t size() const;
  void flush();

 private:
  mutable std::mutex mu_;
  std::vector<std::string> lines_;
  std::ofstream out_;
};

}  // namespace debatelab
