#pragma once

#include <optional>
#include <string>

#include "atf/types.hpp"

namespace atf::orch {

// One parsed model message. At most one of invocation / statement drives the
// loop: a tool call wins; a bare code block is a final-statement declaration;
// neither is chatter.
struct ModelTurn {
  std::string raw;
  std::optional<ToolInvocation> invocation;
  std::optional<FormalStatement> statement;  // code block preceding the call

  bool is_chatter() const { return !invocation && !statement; }
};

// Accepts both <tool_call> and <tool_calls> tag spellings. Throws
// MalformedToolCall / UnknownTool on a present-but-broken call block.
ModelTurn parse_model_turn(const std::string& raw);

// Canonical payload for injection: {"pass": ..., "errors": [...]}.
std::string syntax_payload(const SyntaxReport& report);
// {"pass": ..., "explanations": ...}
std::string consistency_payload(const ConsistencyReport& report);

ToolResult make_syntax_result(const SyntaxReport& report);
ToolResult make_consistency_result(const ConsistencyReport& report);

// <tool_result>\nFunction: <tool>\nOutput: <payload>\n</tool_result>
std::string render_tool_result(const ToolResult& result);

inline constexpr const char* kToolCallOpen = "<tool_call>";
inline constexpr const char* kToolCallClose = "</tool_call>";
inline constexpr const char* kToolCallsOpen = "<tool_calls>";
inline constexpr const char* kToolCallsClose = "</tool_calls>";
inline constexpr const char* kToolResultOpen = "<tool_result>";
inline constexpr const char* kToolResultClose = "</tool_result>";

}  // namespace atf::orch
