#include "atf/orch/loop.hpp"

#include <algorithm>

#include "atf/errors.hpp"
#include "atf/prompts.hpp"

namespace atf::orch {

namespace {

std::string trim(const std::string& text) {
  size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  size_t end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

bool same_code(const std::string& a, const std::string& b) {
  return trim(a) == trim(b);
}

LoopState fail(LoopState s, TrajectoryStatus status) {
  s.phase = Phase::done_failed;
  s.final_status = status;
  return s;
}

}  // namespace

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::awaiting_first_statement: return "awaiting_first_statement";
    case Phase::awaiting_syntax: return "awaiting_syntax";
    case Phase::syntax_passed: return "syntax_passed";
    case Phase::done_success: return "done_success";
    case Phase::done_failed: return "done_failed";
  }
  return "done_failed";
}

LoopState initial_state(const RunConfig& config) {
  LoopState state;
  state.budget = std::max(0, config.max_revisions - 1);
  return state;
}

std::set<ToolKind> next_allowed_tools(const LoopState& state) {
  switch (state.phase) {
    case Phase::awaiting_first_statement:
    case Phase::awaiting_syntax:
      return {ToolKind::syntax_check};
    case Phase::syntax_passed:
      return {ToolKind::consistency_check};
    case Phase::done_success:
    case Phase::done_failed:
      return {};
  }
  return {};
}

StepOutcome step(const LoopState& state, const ModelTurn& turn,
                 const ToolSet& tools, const MathQuery& query,
                 std::vector<FormalStatement>& versions) {
  if (state.terminal()) {
    throw TerminalState("step() called on a finished loop");
  }
  StepOutcome out;
  LoopState s = state;

  if (turn.is_chatter()) {
    // One re-prompt is tolerated; a second contentless turn ends the run.
    if (++s.chatter_strikes >= 2) s = fail(s, TrajectoryStatus::failed_rule);
    out.state = s;
    return out;
  }
  s.chatter_strikes = 0;

  if (!turn.invocation) {
    // A bare final statement before both checks passed breaks the stop rule.
    out.state = fail(s, TrajectoryStatus::failed_rule);
    return out;
  }

  if (turn.statement) {
    if (s.current_version >= 0 && s.revisions_used >= s.budget) {
      // Over-budget revision: refuse before executing anything.
      out.state = fail(s, TrajectoryStatus::failed_budget);
      return out;
    }
    if (s.current_version >= 0) ++s.revisions_used;
    versions.push_back(*turn.statement);
    s.current_version = static_cast<int>(versions.size()) - 1;
    s.phase = Phase::awaiting_syntax;
    s.ran_syntax = false;
    s.ran_consistency = false;
    out.recorded_version = s.current_version;
  }

  const ToolInvocation& invocation = *turn.invocation;
  auto allowed = next_allowed_tools(s);
  bool repeat =
      (invocation.tool == ToolKind::syntax_check && s.ran_syntax) ||
      (invocation.tool == ToolKind::consistency_check && s.ran_consistency);
  if (allowed.count(invocation.tool) == 0 || repeat) {
    out.state = fail(s, TrajectoryStatus::failed_rule);
    return out;
  }
  if (versions.empty() ||
      !same_code(invocation.code,
                 versions[static_cast<size_t>(s.current_version)].code)) {
    // The checked code must be the latest emitted version.
    out.state = fail(s, TrajectoryStatus::failed_rule);
    return out;
  }

  FormalStatement checked =
      versions[static_cast<size_t>(s.current_version)];
  checked.code = invocation.code;

  if (invocation.tool == ToolKind::syntax_check) {
    SyntaxReport report = tools.syntax(checked);
    s.ran_syntax = true;
    s.phase = report.pass ? Phase::syntax_passed : Phase::awaiting_syntax;
    out.result = make_syntax_result(report);
  } else {
    ConsistencyReport report = tools.consistency(query, checked);
    s.ran_consistency = true;
    if (report.pass) {
      s.phase = Phase::done_success;
      s.final_status = TrajectoryStatus::success;
    }
    out.result = make_consistency_result(report);
  }
  out.state = s;
  return out;
}

namespace {

std::string chat_with_retries(backends::ChatClient& model,
                              const std::vector<backends::Message>& messages,
                              const backends::ChatParams& params,
                              int retries) {
  for (int attempt = 0;; ++attempt) {
    try {
      return model.chat(messages, params);
    } catch (const BackendFault& fault) {
      if (!fault.retryable() || attempt >= retries) throw;
    }
  }
}

TrajectoryStep model_step(const ModelTurn& turn,
                          const StepOutcome& outcome) {
  TrajectoryStep step;
  step.kind = StepKind::model_turn;
  step.text = turn.raw;
  step.invocation = turn.invocation;
  step.statement_version = outcome.recorded_version;
  return step;
}

}  // namespace

Trajectory formalize(const MathQuery& query, backends::ChatClient& model,
                     const ToolSet& tools, const RunConfig& config,
                     const FormalizeOptions& options) {
  validate(query);
  Trajectory trajectory;
  trajectory.query = query;

  LoopState state = initial_state(config);
  backends::ChatParams params;
  params.temperature = config.temperature;
  std::vector<backends::Message> messages{
      {"system", options.system_prompt.empty()
                     ? std::string(prompts::kInferenceSystemPrompt)
                     : options.system_prompt},
      {"user", query.text}};

  while (true) {
    std::string raw;
    try {
      raw = chat_with_retries(model, messages, params, options.model_retries);
    } catch (const BackendFault&) {
      trajectory.status = TrajectoryStatus::aborted;
      break;
    }

    ModelTurn turn;
    try {
      turn = parse_model_turn(raw);
    } catch (const Error&) {
      // A broken call block is an attempted invocation we cannot honor.
      TrajectoryStep step;
      step.kind = StepKind::model_turn;
      step.text = raw;
      trajectory.steps.push_back(std::move(step));
      trajectory.status = TrajectoryStatus::failed_rule;
      break;
    }

    StepOutcome outcome =
        step(state, turn, tools, query, trajectory.statements);
    trajectory.steps.push_back(model_step(turn, outcome));
    messages.push_back({"assistant", raw});

    if (outcome.result) {
      std::string rendered = render_tool_result(*outcome.result);
      TrajectoryStep result_step;
      result_step.kind = StepKind::tool_result;
      result_step.text = rendered;
      result_step.result = outcome.result;
      trajectory.steps.push_back(std::move(result_step));
      messages.push_back({"tool", rendered});
    }
    state = outcome.state;

    if (state.phase == Phase::done_success) {
      // One closing turn: the model restates the verified code.
      trajectory.status = TrajectoryStatus::success;
      std::string closing;
      try {
        closing =
            chat_with_retries(model, messages, params, options.model_retries);
      } catch (const BackendFault&) {
        break;  // success already earned; the declaration is a formality
      }
      // Nothing in the closing turn executes; it only has to restate the
      // verified code. Anything else downgrades the run.
      TrajectoryStep step;
      step.kind = StepKind::model_turn;
      step.text = closing;
      bool ok = false;
      try {
        ModelTurn closing_turn = parse_model_turn(closing);
        ok = closing_turn.statement && !closing_turn.invocation &&
             same_code(closing_turn.statement->code,
                       trajectory.statements.back().code);
      } catch (const Error&) {
        ok = false;
      }
      trajectory.steps.push_back(std::move(step));
      if (!ok) trajectory.status = TrajectoryStatus::failed_rule;
      break;
    }
    if (state.phase == Phase::done_failed) {
      trajectory.status = state.final_status;
      break;
    }
  }

  trajectory.revision_count =
      trajectory.statements.empty()
          ? 0
          : static_cast<int>(trajectory.statements.size()) - 1;
  return trajectory;
}

ValidationRuling validate_trajectory(const Trajectory& trajectory) {
  auto violation = [](std::string reason) {
    return ValidationRuling{false, std::move(reason)};
  };

  // Version bookkeeping.
  int expected_version = 0;
  for (const auto& step : trajectory.steps) {
    if (step.kind != StepKind::model_turn || !step.statement_version) continue;
    if (*step.statement_version != expected_version) {
      return violation("statement versions are not sequential");
    }
    ++expected_version;
  }
  if (expected_version != static_cast<int>(trajectory.statements.size())) {
    return violation("recorded versions disagree with the statement list");
  }
  int expected_revisions =
      trajectory.statements.empty()
          ? 0
          : static_cast<int>(trajectory.statements.size()) - 1;
  if (trajectory.revision_count != expected_revisions) {
    return violation("revision_count disagrees with the statement list");
  }

  // Replay the tool sequence.
  int version = -1;
  bool ran_syntax = false;
  bool ran_consistency = false;
  bool syntax_ok = false;  // current version passed syntax
  bool succeeded = false;

  for (size_t i = 0; i < trajectory.steps.size(); ++i) {
    const auto& step = trajectory.steps[i];
    if (step.kind == StepKind::tool_result) {
      bool paired = i > 0 &&
                    trajectory.steps[i - 1].kind == StepKind::model_turn &&
                    trajectory.steps[i - 1].invocation &&
                    trajectory.steps[i - 1].invocation->tool ==
                        step.result.value_or(ToolResult{}).tool;
      if (!step.result || !paired) {
        return violation("tool result without a matching invocation");
      }
      continue;
    }

    if (succeeded) {
      if (step.invocation || step.statement_version) {
        return violation("activity after the run already succeeded");
      }
      continue;  // closing declaration
    }

    if (step.statement_version) {
      version = *step.statement_version;
      ran_syntax = false;
      ran_consistency = false;
      syntax_ok = false;
    }
    if (!step.invocation) continue;

    bool executed = i + 1 < trajectory.steps.size() &&
                    trajectory.steps[i + 1].kind == StepKind::tool_result;
    if (!executed) {
      // A refused call must be where the run ended, with a failure status.
      bool last_turn = true;
      for (size_t j = i + 1; j < trajectory.steps.size(); ++j) {
        if (trajectory.steps[j].kind == StepKind::model_turn &&
            (trajectory.steps[j].invocation ||
             trajectory.steps[j].statement_version)) {
          last_turn = false;
          break;
        }
      }
      if (!last_turn || (trajectory.status != TrajectoryStatus::failed_rule &&
                         trajectory.status != TrajectoryStatus::failed_budget)) {
        return violation("unexecuted invocation inside the run");
      }
      continue;
    }

    const ToolInvocation& inv = *step.invocation;
    if (version < 0 ||
        version >= static_cast<int>(trajectory.statements.size())) {
      return violation("tool executed before any statement version");
    }
    std::string current =
        trajectory.statements[static_cast<size_t>(version)].code;
    auto trim_eq = [](const std::string& a, const std::string& b) {
      auto t = [](const std::string& x) {
        size_t b1 = x.find_first_not_of(" \t\r\n");
        if (b1 == std::string::npos) return std::string();
        size_t e1 = x.find_last_not_of(" \t\r\n");
        return x.substr(b1, e1 - b1 + 1);
      };
      return t(a) == t(b);
    };
    if (!trim_eq(inv.code, current)) {
      return violation("executed code differs from the latest version");
    }

    const ToolResult& result = *trajectory.steps[i + 1].result;
    if (inv.tool == ToolKind::syntax_check) {
      if (ran_syntax) {
        return violation("syntax check repeated on an unchanged version");
      }
      if (syntax_ok) {
        return violation("syntax check after the version already passed");
      }
      ran_syntax = true;
      syntax_ok = result.syntax && result.syntax->pass;
    } else {
      if (!syntax_ok) {
        return violation(
            "consistency check without a prior syntax pass on this version");
      }
      if (ran_consistency) {
        return violation("consistency check repeated on an unchanged version");
      }
      ran_consistency = true;
      if (result.consistency && result.consistency->pass) succeeded = true;
    }
  }

  if (trajectory.status == TrajectoryStatus::success && !succeeded) {
    return violation("success status without a final consistency pass");
  }
  // A run whose checks passed may still end failed_rule when the closing
  // declaration went wrong; other failure statuses cannot follow a pass.
  if (succeeded && trajectory.status != TrajectoryStatus::success &&
      trajectory.status != TrajectoryStatus::failed_rule) {
    return violation("terminal status inconsistent with a final pass");
  }
  return ValidationRuling{};
}

}  // namespace atf::orch
