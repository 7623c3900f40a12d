#include "atf/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "atf/errors.hpp"

namespace atf {

json to_json(const MathQuery& q) {
  return json{{"id", q.id}, {"text", q.text}, {"source", q.source}};
}

MathQuery math_query_from_json(const json& j) {
  MathQuery q;
  q.id = j.value("id", "");
  q.text = j.value("text", "");
  q.source = j.value("source", "");
  return q;
}

json to_json(const FormalStatement& s) {
  return json{{"code", s.code}, {"required_imports", s.required_imports}};
}

FormalStatement formal_statement_from_json(const json& j) {
  FormalStatement s;
  s.code = j.value("code", "");
  if (j.contains("required_imports")) {
    s.required_imports =
        j.at("required_imports").get<std::vector<std::string>>();
  }
  return s;
}

json to_json(const Diagnostic& d) {
  return json{{"severity", to_string(d.severity)},
              {"pos", {{"line", d.start_line}, {"column", d.start_col}}},
              {"endPos", {{"line", d.end_line}, {"column", d.end_col}}},
              {"data", d.message}};
}

Diagnostic diagnostic_from_json(const json& j) {
  Diagnostic d;
  d.severity = severity_from_string(j.value("severity", "error"));
  if (j.contains("pos") && !j.at("pos").is_null()) {
    d.start_line = j.at("pos").value("line", 1);
    d.start_col = j.at("pos").value("column", 0);
  }
  if (j.contains("endPos") && !j.at("endPos").is_null()) {
    d.end_line = j.at("endPos").value("line", d.start_line);
    d.end_col = j.at("endPos").value("column", d.start_col);
  } else {
    d.end_line = d.start_line;
    d.end_col = d.start_col;
  }
  d.message = j.value("data", "");
  return d;
}

json to_json(const ToolInvocation& inv) {
  json j{{"tool", to_string(inv.tool)}, {"code", inv.code}};
  if (!inv.query_text.empty()) j["query_text"] = inv.query_text;
  if (!inv.raw.empty()) j["raw"] = inv.raw;
  return j;
}

ToolInvocation tool_invocation_from_json(const json& j) {
  ToolInvocation inv;
  inv.tool = tool_kind_from_string(j.value("tool", "syntax_check"));
  inv.code = j.value("code", "");
  inv.query_text = j.value("query_text", "");
  inv.raw = j.value("raw", "");
  return inv;
}

json to_json(const SyntaxReport& r) {
  json errors = json::array();
  for (const auto& d : r.errors) errors.push_back(to_json(d));
  json j{{"pass", r.pass}, {"errors", errors}, {"stage", to_string(r.stage)}};
  if (!r.fault.empty()) j["fault"] = r.fault;
  return j;
}

SyntaxReport syntax_report_from_json(const json& j) {
  SyntaxReport r;
  r.pass = j.value("pass", false);
  if (j.contains("errors")) {
    for (const auto& e : j.at("errors")) {
      r.errors.push_back(diagnostic_from_json(e));
    }
  }
  r.stage = syntax_stage_from_string(j.value("stage", "batch"));
  r.fault = j.value("fault", "");
  return r;
}

json to_json(const JudgeVerdict& v) {
  json j{{"judge_id", v.judge_id},
         {"ruling", to_string(v.ruling)},
         {"explanation", v.explanation}};
  if (!v.raw.empty()) j["raw"] = v.raw;
  return j;
}

JudgeVerdict judge_verdict_from_json(const json& j) {
  JudgeVerdict v;
  v.judge_id = j.value("judge_id", "");
  v.ruling = ruling_from_string(j.value("ruling", "unparseable"));
  v.explanation = j.value("explanation", "");
  v.raw = j.value("raw", "");
  return v;
}

json to_json(const ConsistencyReport& r) {
  json judges = json::array();
  for (const auto& v : r.per_judge) judges.push_back(to_json(v));
  return json{{"pass", r.pass},
              {"explanations", r.explanations},
              {"per_judge", judges}};
}

ConsistencyReport consistency_report_from_json(const json& j) {
  ConsistencyReport r;
  r.pass = j.value("pass", false);
  r.explanations = j.value("explanations", "");
  if (j.contains("per_judge")) {
    for (const auto& v : j.at("per_judge")) {
      r.per_judge.push_back(judge_verdict_from_json(v));
    }
  }
  return r;
}

json to_json(const ToolResult& r) {
  json j{{"tool", to_string(r.tool)}};
  if (r.syntax) j["syntax"] = to_json(*r.syntax);
  if (r.consistency) j["consistency"] = to_json(*r.consistency);
  return j;
}

ToolResult tool_result_from_json(const json& j) {
  ToolResult r;
  r.tool = tool_kind_from_string(j.value("tool", "syntax_check"));
  if (j.contains("syntax")) {
    r.syntax = syntax_report_from_json(j.at("syntax"));
  }
  if (j.contains("consistency")) {
    r.consistency = consistency_report_from_json(j.at("consistency"));
  }
  return r;
}

json to_json(const TrajectoryStep& s) {
  json j{{"kind", to_string(s.kind)}, {"text", s.text}};
  if (s.invocation) j["invocation"] = to_json(*s.invocation);
  if (s.statement_version) j["statement_version"] = *s.statement_version;
  if (s.result) j["result"] = to_json(*s.result);
  return j;
}

TrajectoryStep trajectory_step_from_json(const json& j) {
  TrajectoryStep s;
  s.kind = step_kind_from_string(j.value("kind", "model_turn"));
  s.text = j.value("text", "");
  if (j.contains("invocation")) {
    s.invocation = tool_invocation_from_json(j.at("invocation"));
  }
  if (j.contains("statement_version")) {
    s.statement_version = j.at("statement_version").get<int>();
  }
  if (j.contains("result")) {
    s.result = tool_result_from_json(j.at("result"));
  }
  return s;
}

json to_json(const Trajectory& t) {
  json steps = json::array();
  for (const auto& s : t.steps) steps.push_back(to_json(s));
  json statements = json::array();
  for (const auto& s : t.statements) statements.push_back(to_json(s));
  return json{{"query", to_json(t.query)},
              {"statements", statements},
              {"steps", steps},
              {"status", to_string(t.status)},
              {"revision_count", t.revision_count}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  if (j.contains("query")) t.query = math_query_from_json(j.at("query"));
  if (j.contains("statements")) {
    for (const auto& s : j.at("statements")) {
      t.statements.push_back(formal_statement_from_json(s));
    }
  }
  if (j.contains("steps")) {
    for (const auto& s : j.at("steps")) {
      t.steps.push_back(trajectory_step_from_json(s));
    }
  }
  t.status = trajectory_status_from_string(j.value("status", "aborted"));
  t.revision_count = j.value("revision_count", 0);
  return t;
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<json> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t' && c != '\r') {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": bad JSON: " + e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::string& path, const std::vector<json>& rows) {
  std::ostringstream out;
  for (const auto& row : rows) out << row.dump() << "\n";
  write_file_atomic(path, out.str());
}

std::vector<MathQuery> read_queries(const std::string& path) {
  std::vector<MathQuery> qs;
  for (const auto& row : read_jsonl(path)) {
    qs.push_back(math_query_from_json(row));
  }
  return qs;
}

void write_queries(const std::string& path, const std::vector<MathQuery>& qs) {
  std::vector<json> rows;
  rows.reserve(qs.size());
  for (const auto& q : qs) rows.push_back(to_json(q));
  write_jsonl(path, rows);
}

std::vector<Trajectory> read_trajectories(const std::string& path) {
  std::vector<Trajectory> ts;
  for (const auto& row : read_jsonl(path)) {
    ts.push_back(trajectory_from_json(row));
  }
  return ts;
}

void write_trajectories(const std::string& path,
                        const std::vector<Trajectory>& ts) {
  std::vector<json> rows;
  rows.reserve(ts.size());
  for (const auto& t : ts) rows.push_back(to_json(t));
  write_jsonl(path, rows);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ConfigError("cannot replace " + path);
  }
}

}  // namespace atf
