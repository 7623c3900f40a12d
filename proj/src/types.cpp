#include "atf/types.hpp"

#include <sstream>

#include "atf/errors.hpp"

namespace atf {

void validate(const MathQuery& query) {
  if (query.id.empty()) throw ConfigError("query id must not be empty");
  if (query.text.empty()) {
    throw ConfigError("query text must not be empty (id=" + query.id + ")");
  }
}

std::vector<std::string> extract_imports(std::string_view code) {
  std::vector<std::string> names;
  size_t pos = 0;
  while (pos <= code.size()) {
    size_t eol = code.find('\n', pos);
    std::string_view line =
        code.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
    size_t begin = line.find_first_not_of(" \t\r");
    if (begin != std::string_view::npos) {
      std::string_view trimmed = line.substr(begin);
      if (trimmed.substr(0, 7) == "import " || trimmed == "import") {
        std::string_view rest = trimmed.size() > 7 ? trimmed.substr(7) : "";
        size_t s = rest.find_first_not_of(" \t");
        size_t e = rest.find_last_not_of(" \t\r");
        if (s != std::string_view::npos) {
          std::string name(rest.substr(s, e - s + 1));
          bool seen = false;
          for (const auto& n : names) {
            if (n == name) {
              seen = true;
              break;
            }
          }
          if (!seen) names.push_back(std::move(name));
        }
      }
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  return names;
}

const char* to_string(Severity severity) {
  switch (severity) {
    case Severity::error: return "error";
    case Severity::warning: return "warning";
    case Severity::info: return "info";
  }
  return "error";
}

Severity severity_from_string(const std::string& name) {
  if (name == "error") return Severity::error;
  if (name == "warning") return Severity::warning;
  if (name == "info" || name == "information") return Severity::info;
  throw ConfigError("unknown severity: " + name);
}

bool is_error(const Diagnostic& d) { return d.severity == Severity::error; }

bool diagnostics_pass(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (is_error(d)) return false;
  }
  return true;
}

const char* to_string(ToolKind tool) {
  switch (tool) {
    case ToolKind::syntax_check: return "syntax_check";
    case ToolKind::consistency_check: return "consistency_check";
  }
  return "syntax_check";
}

ToolKind tool_kind_from_string(const std::string& name) {
  if (name == "syntax_check") return ToolKind::syntax_check;
  if (name == "consistency_check") return ToolKind::consistency_check;
  throw UnknownTool("unknown tool: " + name);
}

const char* to_string(SyntaxStage stage) {
  switch (stage) {
    case SyntaxStage::precheck: return "precheck";
    case SyntaxStage::batch: return "batch";
    case SyntaxStage::individual_fallback: return "individual_fallback";
  }
  return "batch";
}

SyntaxStage syntax_stage_from_string(const std::string& name) {
  if (name == "precheck") return SyntaxStage::precheck;
  if (name == "batch") return SyntaxStage::batch;
  if (name == "individual_fallback") return SyntaxStage::individual_fallback;
  throw ConfigError("unknown syntax stage: " + name);
}

const char* to_string(Ruling ruling) {
  switch (ruling) {
    case Ruling::consistent: return "consistent";
    case Ruling::inconsistent: return "inconsistent";
    case Ruling::unparseable: return "unparseable";
  }
  return "unparseable";
}

Ruling ruling_from_string(const std::string& name) {
  if (name == "consistent") return Ruling::consistent;
  if (name == "inconsistent") return Ruling::inconsistent;
  if (name == "unparseable") return Ruling::unparseable;
  throw ConfigError("unknown ruling: " + name);
}

const char* to_string(StepKind kind) {
  switch (kind) {
    case StepKind::model_turn: return "model_turn";
    case StepKind::tool_result: return "tool_result";
  }
  return "model_turn";
}

StepKind step_kind_from_string(const std::string& name) {
  if (name == "model_turn") return StepKind::model_turn;
  if (name == "tool_result") return StepKind::tool_result;
  throw ConfigError("unknown step kind: " + name);
}

const char* to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::success: return "success";
    case TrajectoryStatus::failed_budget: return "failed_budget";
    case TrajectoryStatus::failed_rule: return "failed_rule";
    case TrajectoryStatus::aborted: return "aborted";
  }
  return "aborted";
}

TrajectoryStatus trajectory_status_from_string(const std::string& name) {
  if (name == "success") return TrajectoryStatus::success;
  if (name == "failed_budget") return TrajectoryStatus::failed_budget;
  if (name == "failed_rule") return TrajectoryStatus::failed_rule;
  if (name == "aborted") return TrajectoryStatus::aborted;
  throw ConfigError("unknown trajectory status: " + name);
}

int count_revisions(const Trajectory& trajectory) {
  if (trajectory.statements.empty()) {
    throw EmptyTrajectory("trajectory for query '" + trajectory.query.id +
                          "' has no statements");
  }
  return static_cast<int>(trajectory.statements.size()) - 1;
}

int count_tool_calls(const Trajectory& trajectory) {
  int n = 0;
  for (const auto& step : trajectory.steps) {
    if (step.kind == StepKind::tool_result) ++n;
  }
  return n;
}

void validate(const RunConfig& config) {
  std::ostringstream bad;
  if (config.max_revisions < 1) bad << "max_revisions must be >= 1; ";
  if (config.samples_per_query < 1) bad << "samples_per_query must be >= 1; ";
  if (config.batch_size < 1) bad << "batch_size must be >= 1; ";
  if (config.compile_timeout_s <= 0) bad << "compile_timeout_s must be > 0; ";
  if (config.temperature < 0) bad << "temperature must be >= 0; ";
  if (config.decontamination_threshold < 0 ||
      config.decontamination_threshold > 1) {
    bad << "decontamination_threshold must be in [0, 1]; ";
  }
  if (config.judge_order.empty()) bad << "judge_order must not be empty; ";
  std::string msg = bad.str();
  if (!msg.empty()) throw ConfigError("invalid run config: " + msg);
}

}  // namespace atf
