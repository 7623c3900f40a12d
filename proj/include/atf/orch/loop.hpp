#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "atf/backends/clients.hpp"
#include "atf/orch/wire.hpp"
#include "atf/types.hpp"

namespace atf::orch {

enum class Phase {
  awaiting_first_statement,
  awaiting_syntax,
  syntax_passed,
  done_success,
  done_failed,
};

const char* to_string(Phase phase);

struct LoopState {
  Phase phase = Phase::awaiting_first_statement;
  int current_version = -1;
  int revisions_used = 0;
  int budget = 3;  // allowed revisions; versions 0..budget
  // Each tool may run once per version; a repeat without a revision is a
  // protocol violation (this is what bounds executions to 2 per version).
  bool ran_syntax = false;
  bool ran_consistency = false;
  int chatter_strikes = 0;
  TrajectoryStatus final_status = TrajectoryStatus::aborted;

  bool terminal() const {
    return phase == Phase::done_success || phase == Phase::done_failed;
  }
};

// budget = max_revisions - 1: a cap of "revisions < K" allows K - 1 of them.
LoopState initial_state(const RunConfig& config);

std::set<ToolKind> next_allowed_tools(const LoopState& state);

// Tool executors injected by the caller; mocks in tests, real tools in the
// CLI. Both receive the statement taken from the invocation arguments.
struct ToolSet {
  std::function<SyntaxReport(const FormalStatement&)> syntax;
  std::function<ConsistencyReport(const MathQuery&, const FormalStatement&)>
      consistency;
};

struct StepOutcome {
  LoopState state;
  std::optional<ToolResult> result;     // present when a tool executed
  std::optional<int> recorded_version;  // set when the turn added a version
};

// Advances the rule machine by one model turn. Appends any new statement
// version to `versions`. Throws TerminalState when called on a finished loop.
StepOutcome step(const LoopState& state, const ModelTurn& turn,
                 const ToolSet& tools, const MathQuery& query,
                 std::vector<FormalStatement>& versions);

struct FormalizeOptions {
  int model_retries = 1;  // retryable faults only
  std::string system_prompt;  // empty: shipped inference prompt
};

// Runs the full loop for one query: seeds the conversation, alternates model
// turns with injected tool results, stops at a terminal phase or when the
// model client fails (status aborted).
Trajectory formalize(const MathQuery& query, backends::ChatClient& model,
                     const ToolSet& tools, const RunConfig& config,
                     const FormalizeOptions& options = {});

struct ValidationRuling {
  bool compliant = true;
  std::string violation;  // empty when compliant
};

// Replays the recorded tool sequence through the rule machine and checks the
// terminal status against what the results imply.
ValidationRuling validate_trajectory(const Trajectory& trajectory);

}  // namespace atf::orch
