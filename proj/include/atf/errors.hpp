#pragma once

#include <stdexcept>
#include <string>

namespace atf {

// Base for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration, CLI usage errors included.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numeric argument outside the valid domain (e.g. c > n in pass@k).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Per-query sample counts disagree where a uniform budget is required.
class RaggedSamples : public Error {
 public:
  using Error::Error;
};

// Correlation input with zero variance or mismatched lengths.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// Trajectory with no recorded statements where one is required.
class EmptyTrajectory : public Error {
 public:
  using Error::Error;
};

// Diagnostic line falls outside every member range of an assembled file.
class UnmappableDiagnostic : public Error {
 public:
  using Error::Error;
};

// Tool call tag present but payload is not a {name, arguments} object.
class MalformedToolCall : public Error {
 public:
  using Error::Error;
};

// Tool call names a tool that is not registered.
class UnknownTool : public Error {
 public:
  using Error::Error;
};

// step() invoked on a loop state that already reached a terminal phase.
class TerminalState : public Error {
 public:
  using Error::Error;
};

// Consistency vote requested over an empty judge panel.
class EmptyPanel : public Error {
 public:
  using Error::Error;
};

// Loss-mask annotation could not locate the expected tag spans.
class SerializationMismatch : public Error {
 public:
  using Error::Error;
};

// Fewer usable perturbation candidates than requested.
class InsufficientCandidates : public Error {
 public:
  using Error::Error;
};

// A scripted mock received a request no remaining entry matches.
class ScriptMismatch : public Error {
 public:
  using Error::Error;
};

enum class FaultKind {
  timeout,
  transport,
  server_error,
  rate_limited,
  model_refusal,
  provider_failure,
};

const char* to_string(FaultKind kind);
FaultKind fault_kind_from_string(const std::string& name);

// Failure surfaced by a backend (Lean pool, chat endpoint, embedding service).
class BackendFault : public Error {
 public:
  BackendFault(FaultKind kind, const std::string& message)
      : Error(message), kind_(kind) {}

  FaultKind kind() const { return kind_; }

  bool retryable() const {
    return kind_ == FaultKind::timeout || kind_ == FaultKind::transport ||
           kind_ == FaultKind::rate_limited;
  }

 private:
  FaultKind kind_;
};

}  // namespace atf
