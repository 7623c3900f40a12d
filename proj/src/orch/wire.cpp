#include "atf/orch/wire.hpp"

#include <json.hpp>

#include "atf/errors.hpp"
#include "atf/json_io.hpp"

namespace atf::orch {

namespace {

std::string trim(const std::string& text) {
  size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  size_t end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

// Last complete fenced code block strictly before `limit`.
std::optional<std::string> last_code_block(const std::string& text,
                                           size_t limit) {
  std::optional<std::string> found;
  size_t pos = 0;
  while (pos < limit) {
    size_t open = text.find("```", pos);
    if (open == std::string::npos || open >= limit) break;
    size_t content_start = text.find('\n', open + 3);
    if (content_start == std::string::npos) break;
    ++content_start;
    size_t close = text.find("```", content_start);
    if (close == std::string::npos || close > limit) break;
    std::string body = text.substr(content_start, close - content_start);
    if (!body.empty() && body.back() == '\n') body.pop_back();
    if (!trim(body).empty()) found = body;
    pos = close + 3;
  }
  return found;
}

struct CallBlock {
  size_t open_pos;
  std::string payload;
};

std::optional<CallBlock> last_call_block(const std::string& text) {
  std::optional<CallBlock> best;
  for (auto [open_tag, close_tag] :
       {std::pair{kToolCallOpen, kToolCallClose},
        std::pair{kToolCallsOpen, kToolCallsClose}}) {
    size_t open = text.rfind(open_tag);
    if (open == std::string::npos) continue;
    size_t payload_start = open + std::string(open_tag).size();
    size_t close = text.find(close_tag, payload_start);
    if (close == std::string::npos) {
      throw MalformedToolCall(std::string("unterminated ") + open_tag +
                              " block");
    }
    if (!best || open > best->open_pos) {
      best = CallBlock{open, text.substr(payload_start, close - payload_start)};
    }
  }
  return best;
}

}  // namespace

ModelTurn parse_model_turn(const std::string& raw) {
  ModelTurn turn;
  turn.raw = raw;

  auto call = last_call_block(raw);
  size_t block_limit = call ? call->open_pos : raw.size();
  if (auto code = last_code_block(raw, block_limit)) {
    FormalStatement statement;
    statement.code = *code;
    turn.statement = std::move(statement);
  }
  if (!call) return turn;

  nlohmann::json payload;
  try {
    payload = nlohmann::json::parse(call->payload);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedToolCall(std::string("tool call payload is not valid: ") +
                            e.what());
  }
  if (!payload.is_object() || !payload.contains("name") ||
      !payload["name"].is_string() || !payload.contains("arguments") ||
      !payload["arguments"].is_object()) {
    throw MalformedToolCall(
        "tool call payload must be a {name, arguments} object");
  }
  ToolInvocation invocation;
  invocation.tool = tool_kind_from_string(payload["name"].get<std::string>());
  const auto& args = payload["arguments"];
  if (!args.contains("lean4_code") || !args["lean4_code"].is_string()) {
    throw MalformedToolCall("tool call arguments lack a lean4_code string");
  }
  invocation.code = args["lean4_code"].get<std::string>();
  if (args.contains("query") && args["query"].is_string()) {
    invocation.query_text = args["query"].get<std::string>();
  }
  invocation.raw = call->payload;
  turn.invocation = std::move(invocation);
  return turn;
}

std::string syntax_payload(const SyntaxReport& report) {
  json payload;
  payload["pass"] = report.pass;
  json errors = json::array();
  for (const auto& d : report.errors) errors.push_back(to_json(d));
  payload["errors"] = std::move(errors);
  return payload.dump(2);
}

std::string consistency_payload(const ConsistencyReport& report) {
  json payload;
  payload["pass"] = report.pass;
  payload["explanations"] = report.explanations;
  return payload.dump(2);
}

ToolResult make_syntax_result(const SyntaxReport& report) {
  ToolResult result;
  result.tool = ToolKind::syntax_check;
  result.syntax = report;
  return result;
}

ToolResult make_consistency_result(const ConsistencyReport& report) {
  ToolResult result;
  result.tool = ToolKind::consistency_check;
  result.consistency = report;
  return result;
}

std::string render_tool_result(const ToolResult& result) {
  std::string payload;
  if (result.tool == ToolKind::syntax_check) {
    payload = syntax_payload(result.syntax.value_or(SyntaxReport{}));
  } else {
    payload =
        consistency_payload(result.consistency.value_or(ConsistencyReport{}));
  }
  std::string out(kToolResultOpen);
  out += "\nFunction: ";
  out += to_string(result.tool);
  out += "\nOutput: ";
  out += payload;
  out += "\n";
  out += kToolResultClose;
  return out;
}

}  // namespace atf::orch
