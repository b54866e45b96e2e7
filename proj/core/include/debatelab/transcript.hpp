#pragma once

#include <string>
#include <vector>

namespace debatelab {

struct TranscriptEntry {
  int iteration = 0;  // 1-based
  std::string persona_id;
  std::string speaker;
  std::string utterance;

  bool operator==(const TranscriptEntry&) const = default;
};

struct Transcript {
  std::vector<TranscriptEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

// "Name: utterance" lines joined by newlines.
std::string render_history(const Transcript& transcript);

}  // namespace debatelab
