#include "atf/errors.hpp"

namespace atf {

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::timeout: return "timeout";
    case FaultKind::transport: return "transport";
    case FaultKind::server_error: return "server_error";
    case FaultKind::rate_limited: return "rate_limited";
    case FaultKind::model_refusal: return "model_refusal";
    case FaultKind::provider_failure: return "provider_failure";
  }
  return "provider_failure";
}

FaultKind fault_kind_from_string(const std::string& name) {
  if (name == "timeout") return FaultKind::timeout;
  if (name == "transport") return FaultKind::transport;
  if (name == "server_error") return FaultKind::server_error;
  if (name == "rate_limited") return FaultKind::rate_limited;
  if (name == "model_refusal") return FaultKind::model_refusal;
  if (name == "provider_failure") return FaultKind::provider_failure;
  throw ConfigError("unknown fault kind: " + name);
}

}  // namespace atf
