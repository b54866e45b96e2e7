#pragma once

#include <stdexcept>
#include <string>

namespace debatelab {

// Base of every error raised by the library. The CLI maps ConfigError to
// exit code 1 and everything else to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent user input (config files, specs, arguments).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// --- llm-gateway -----------------------------------------------------------

class TransportError : public Error {
 public:
  TransportError(const std::string& what, int http_status = 0, bool retriable = false)
      : Error(what), http_status_(http_status), retriable_(retriable) {}

  int http_status() const noexcept { return http_status_; }
  bool retriable() const noexcept { return retriable_; }

 private:
  int http_status_;
  bool retriable_;
};

class AuthError : public TransportError {
 public:
  explicit AuthError(const std::string& what, int http_status = 401)
      : TransportError(what, http_status, false) {}
};

// The backend answered with whitespace only.
class EmptyCompletion : public Error {
 public:
  using Error::Error;
};

// --- persona-forge / debate-engine ------------------------------------------

class MissingStance : public Error {
 public:
  using Error::Error;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

// --- experiment-runner ------------------------------------------------------

class RosterExhausted : public Error {
 public:
  using Error::Error;
};

// --- analysis ---------------------------------------------------------------

class NoCompletedRuns : public Error {
 public:
  using Error::Error;
};

class MissingRole : public Error {
 public:
  using Error::Error;
};

class WrongFamily : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

// --- tuneset-builder --------------------------------------------------------

class ExpansionExhausted : public Error {
 public:
  using Error::Error;
};

class DisjointQuestionSets : public Error {
 public:
  using Error::Error;
};

}  // namespace debatelab
