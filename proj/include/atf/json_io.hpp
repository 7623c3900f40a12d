#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "atf/types.hpp"

namespace atf {

using json = nlohmann::ordered_json;

json to_json(const MathQuery& q);
MathQuery math_query_from_json(const json& j);

json to_json(const FormalStatement& s);
FormalStatement formal_statement_from_json(const json& j);

// Wire shape used by the compiler service and the syntax tool payload:
// {"severity": ..., "pos": {"line", "column"}, "endPos": {...}, "data": ...}
json to_json(const Diagnostic& d);
Diagnostic diagnostic_from_json(const json& j);

json to_json(const ToolInvocation& inv);
ToolInvocation tool_invocation_from_json(const json& j);

json to_json(const SyntaxReport& r);
SyntaxReport syntax_report_from_json(const json& j);

json to_json(const JudgeVerdict& v);
JudgeVerdict judge_verdict_from_json(const json& j);

json to_json(const ConsistencyReport& r);
ConsistencyReport consistency_report_from_json(const json& j);

json to_json(const ToolResult& r);
ToolResult tool_result_from_json(const json& j);

json to_json(const TrajectoryStep& s);
TrajectoryStep trajectory_step_from_json(const json& j);

json to_json(const Trajectory& t);
Trajectory trajectory_from_json(const json& j);

// JSONL helpers. Readers skip blank lines and throw ConfigError on bad JSON.
std::vector<json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<json>& rows);

std::vector<MathQuery> read_queries(const std::string& path);
void write_queries(const std::string& path, const std::vector<MathQuery>& qs);

std::vector<Trajectory> read_trajectories(const std::string& path);
void write_trajectories(const std::string& path,
                        const std::vector<Trajectory>& ts);

// Whole-file read; throws ConfigError when the file cannot be opened.
std::string read_file(const std::string& path);

// Atomic replace: write to <path>.tmp then rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace atf
