#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace atf {

// ---------------------------------------------------------------------------
// Queries and statements
// ---------------------------------------------------------------------------

struct MathQuery {
  std::string id;
  std::string text;
  std::string source;
};

// Throws ConfigError when id or text is empty.
void validate(const MathQuery& query);

struct FormalStatement {
  std::string code;
  std::vector<std::string> required_imports{"Mathlib", "Aesop"};
};

// Import names appearing in `import X` lines, in order of first appearance.
std::vector<std::string> extract_imports(std::string_view code);

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

enum class Severity { error, warning, info };

const char* to_string(Severity severity);
Severity severity_from_string(const std::string& name);

// One compiler message. Lines are 1-based, columns 0-based.
struct Diagnostic {
  Severity severity = Severity::error;
  int start_line = 1;
  int start_col = 0;
  int end_line = 1;
  int end_col = 0;
  std::string message;
};

bool is_error(const Diagnostic& d);

// True when no diagnostic has error severity.
bool diagnostics_pass(const std::vector<Diagnostic>& diags);

// ---------------------------------------------------------------------------
// Tool invocations and results
// ---------------------------------------------------------------------------

enum class ToolKind { syntax_check, consistency_check };

const char* to_string(ToolKind tool);
// Throws UnknownTool for anything else.
ToolKind tool_kind_from_string(const std::string& name);

struct ToolInvocation {
  ToolKind tool = ToolKind::syntax_check;
  std::string code;        // lean4_code argument
  std::string query_text;  // optional extra argument, empty when absent
  std::string raw;         // verbatim tag block as the model wrote it
};

enum class SyntaxStage { precheck, batch, individual_fallback };

const char* to_string(SyntaxStage stage);
SyntaxStage syntax_stage_from_string(const std::string& name);

struct SyntaxReport {
  bool pass = false;
  std::vector<Diagnostic> errors;  // full diagnostic list, statement-local
  SyntaxStage stage = SyntaxStage::batch;
  std::string fault;  // nonempty when the backend itself failed
};

enum class Ruling { consistent, inconsistent, unparseable };

const char* to_string(Ruling ruling);
Ruling ruling_from_string(const std::string& name);

struct JudgeVerdict {
  std::string judge_id;
  Ruling ruling = Ruling::unparseable;
  std::string explanation;  // empty when unparseable
  std::string raw;          // verbatim judge output
};

struct ConsistencyReport {
  bool pass = false;
  std::string explanations;
  std::vector<JudgeVerdict> per_judge;
};

struct ToolResult {
  ToolKind tool = ToolKind::syntax_check;
  std::optional<SyntaxReport> syntax;
  std::optional<ConsistencyReport> consistency;
};

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

enum class StepKind { model_turn, tool_result };

const char* to_string(StepKind kind);
StepKind step_kind_from_string(const std::string& name);

struct TrajectoryStep {
  StepKind kind = StepKind::model_turn;
  std::string text;  // model output, or the rendered tool result block
  std::optional<ToolInvocation> invocation;  // model turns only
  std::optional<int> statement_version;      // set when this turn introduced one
  std::optional<ToolResult> result;          // tool result steps only
};

enum class TrajectoryStatus { success, failed_budget, failed_rule, aborted };

const char* to_string(TrajectoryStatus status);
TrajectoryStatus trajectory_status_from_string(const std::string& name);

struct Trajectory {
  MathQuery query;
  std::vector<TrajectoryStep> steps;
  std::vector<FormalStatement> statements;  // version history, v0 first
  TrajectoryStatus status = TrajectoryStatus::aborted;
  int revision_count = 0;
};

// statements.size() - 1. Throws EmptyTrajectory when no statement exists.
int count_revisions(const Trajectory& trajectory);

// Number of executed tool calls (tool result steps).
int count_tool_calls(const Trajectory& trajectory);

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  int max_revisions = 4;        // strict upper bound on revisions per sample
  int samples_per_query = 16;
  double temperature = 0.6;
  int batch_size = 20;          // statements per compiler batch
  double compile_timeout_s = 300.0;
  std::vector<std::string> judge_order{"qwq-32b", "qwen3-32b"};
  double decontamination_threshold = 0.8;
};

// Throws ConfigError on non-positive budgets or thresholds outside [0, 1].
void validate(const RunConfig& config);

}  // namespace atf
