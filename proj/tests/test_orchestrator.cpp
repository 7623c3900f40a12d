#include <memory>
#include <string>
#include <vector>

#include <doctest.h>

#include "atf/backends/mocks.hpp"
#include "atf/errors.hpp"
#include "atf/orch/loop.hpp"
#include "atf/orch/wire.hpp"
#include "atf/syntax/runner.hpp"
#include "atf/judge/consistency.hpp"
#include "fixtures.hpp"

namespace orch = atf::orch;
namespace backends = atf::backends;

namespace {

// Tool set with canned outcomes, for driving the rule machine directly.
orch::ToolSet canned_tools(bool syntax_pass, bool consistency_pass) {
  orch::ToolSet tools;
  tools.syntax = [syntax_pass](const atf::FormalStatement&) {
    atf::SyntaxReport report;
    report.pass = syntax_pass;
    if (!syntax_pass) report.errors.push_back(fixtures::case_study_error());
    return report;
  };
  tools.consistency = [consistency_pass](const atf::MathQuery&,
                                         const atf::FormalStatement&) {
    atf::ConsistencyReport report;
    report.pass = consistency_pass;
    return report;
  };
  return tools;
}

orch::ToolSet case_study_tools(
    std::shared_ptr<backends::ScriptedLeanClient> lean,
    std::vector<atf::judge::Judge> judges, const atf::RunConfig& config) {
  orch::ToolSet tools;
  tools.syntax = [lean, config](const atf::FormalStatement& statement) {
    return atf::syntax::check_statement(statement, *lean, config);
  };
  tools.consistency = [judges](const atf::MathQuery& query,
                               const atf::FormalStatement& statement) {
    return atf::judge::run_consistency_check(query, statement, judges);
  };
  return tools;
}

}  // namespace

TEST_CASE("model turns parse both tag spellings") {
  std::string singular = fixtures::fenced(fixtures::kCaseStudyV0) + "\n" +
                         "<tool_call>\n{\"name\": \"syntax_check\", "
                         "\"arguments\": {\"lean4_code\": \"code\"}}\n"
                         "</tool_call>";
  orch::ModelTurn turn = orch::parse_model_turn(singular);
  REQUIRE(turn.invocation.has_value());
  CHECK(turn.invocation->tool == atf::ToolKind::syntax_check);
  CHECK(turn.invocation->code == "code");
  REQUIRE(turn.statement.has_value());
  CHECK(turn.statement->code == fixtures::kCaseStudyV0);

  orch::ModelTurn plural =
      orch::parse_model_turn(fixtures::case_study_model_turns()[0]);
  REQUIRE(plural.invocation.has_value());
  CHECK(plural.invocation->code == fixtures::kCaseStudyV0);
  CHECK(plural.statement->code == fixtures::kCaseStudyV0);
}

TEST_CASE("the last call block wins") {
  std::string raw =
      fixtures::call_block("syntax_check", "first") + "\n\n" +
      fixtures::call_block("consistency_check", "second");
  orch::ModelTurn turn = orch::parse_model_turn(raw);
  CHECK(turn.invocation->tool == atf::ToolKind::consistency_check);
  CHECK(turn.invocation->code == "second");
}

TEST_CASE("chatter and bare statements classify correctly") {
  CHECK(orch::parse_model_turn("Let me think about this.").is_chatter());
  orch::ModelTurn bare =
      orch::parse_model_turn("**Final Statement**\n" +
                             fixtures::fenced(fixtures::kCaseStudyV1));
  CHECK_FALSE(bare.invocation.has_value());
  REQUIRE(bare.statement.has_value());
  CHECK(bare.statement->code == fixtures::kCaseStudyV1);
}

TEST_CASE("broken call blocks throw specific errors") {
  CHECK_THROWS_AS(orch::parse_model_turn("<tool_call>\nnot json\n</tool_call>"),
                  atf::MalformedToolCall);
  CHECK_THROWS_AS(orch::parse_model_turn("<tool_calls>\n{\"name\": 3, "
                                         "\"arguments\": {}}\n</tool_calls>"),
                  atf::MalformedToolCall);
  CHECK_THROWS_AS(
      orch::parse_model_turn("<tool_call>\n{\"name\": \"syntax_check\", "
                             "\"arguments\": {}}\n</tool_call>"),
      atf::MalformedToolCall);
  CHECK_THROWS_AS(
      orch::parse_model_turn(fixtures::call_block("prove_it", "x")),
      atf::UnknownTool);
  CHECK_THROWS_AS(orch::parse_model_turn("<tool_call>\n{\"name\": "
                                         "\"syntax_check\""),
                  atf::MalformedToolCall);
}

TEST_CASE("tool result payloads match the recorded wire bytes") {
  atf::SyntaxReport fail;
  fail.pass = false;
  fail.errors.push_back(fixtures::case_study_error());
  CHECK(orch::syntax_payload(fail) == fixtures::kSyntaxFailPayload);

  atf::SyntaxReport pass;
  pass.pass = true;
  CHECK(orch::syntax_payload(pass) == fixtures::kSyntaxPassPayload);

  atf::ConsistencyReport consistent;
  consistent.pass = true;
  consistent.explanations = fixtures::kCaseStudyExplanation;
  std::string payload = orch::consistency_payload(consistent);
  CHECK(payload.find("{\n  \"pass\": true,\n  \"explanations\": \"1. "
                     "Mathematical Text Analysis:") == 0);
  CHECK(atf::json::parse(payload)["explanations"] ==
        fixtures::kCaseStudyExplanation);

  atf::ToolResult result = orch::make_syntax_result(fail);
  std::string rendered = orch::render_tool_result(result);
  CHECK(rendered ==
        "<tool_result>\nFunction: syntax_check\nOutput: " +
            fixtures::kSyntaxFailPayload + "\n</tool_result>");
}

TEST_CASE("state machine: budget comes from the revision cap") {
  atf::RunConfig config;
  config.max_revisions = 4;
  orch::LoopState state = orch::initial_state(config);
  CHECK(state.budget == 3);
  CHECK(state.phase == orch::Phase::awaiting_first_statement);
  CHECK(orch::next_allowed_tools(state) ==
        std::set<atf::ToolKind>{atf::ToolKind::syntax_check});
}

TEST_CASE("state machine: consistency is gated on a syntax pass") {
  atf::RunConfig config;
  orch::LoopState state = orch::initial_state(config);
  std::vector<atf::FormalStatement> versions;
  auto tools = canned_tools(true, true);
  atf::MathQuery query = fixtures::case_study_query();

  // Asking for consistency_check before any syntax pass breaks the rules.
  orch::ModelTurn premature = orch::parse_model_turn(
      fixtures::fenced("v0 := by sorry") + "\n" +
      fixtures::call_block("consistency_check", "v0 := by sorry"));
  auto outcome = orch::step(state, premature, tools, query, versions);
  CHECK(outcome.state.phase == orch::Phase::done_failed);
  CHECK(outcome.state.final_status == atf::TrajectoryStatus::failed_rule);
}

TEST_CASE("state machine: happy path and closing turn") {
  atf::RunConfig config;
  orch::LoopState state = orch::initial_state(config);
  std::vector<atf::FormalStatement> versions;
  auto tools = canned_tools(true, true);
  atf::MathQuery query = fixtures::case_study_query();

  orch::ModelTurn first = orch::parse_model_turn(
      fixtures::fenced("v0 := by sorry") + "\n" +
      fixtures::call_block("syntax_check", "v0 := by sorry"));
  auto after_syntax = orch::step(state, first, tools, query, versions);
  CHECK(after_syntax.state.phase == orch::Phase::syntax_passed);
  CHECK(after_syntax.recorded_version == 0);
  REQUIRE(after_syntax.result.has_value());
  CHECK(after_syntax.result->syntax->pass);
  CHECK(orch::next_allowed_tools(after_syntax.state) ==
        std::set<atf::ToolKind>{atf::ToolKind::consistency_check});

  orch::ModelTurn second = orch::parse_model_turn(
      fixtures::call_block("consistency_check", "v0 := by sorry"));
  auto done = orch::step(after_syntax.state, second, tools, query, versions);
  CHECK(done.state.phase == orch::Phase::done_success);
  CHECK(done.state.final_status == atf::TrajectoryStatus::success);
  CHECK(versions.size() == 1);

  CHECK_THROWS_AS(orch::step(done.state, second, tools, query, versions),
                  atf::TerminalState);
}

TEST_CASE("state machine: repeating a tool on the same version is fatal") {
  atf::RunConfig config;
  orch::LoopState state = orch::initial_state(config);
  std::vector<atf::FormalStatement> versions;
  auto tools = canned_tools(false, true);
  atf::MathQuery query = fixtures::case_study_query();

  orch::ModelTurn first = orch::parse_model_turn(
      fixtures::fenced("v0 := by sorry") + "\n" +
      fixtures::call_block("syntax_check", "v0 := by sorry"));
  auto failed = orch::step(state, first, tools, query, versions);
  CHECK(failed.state.phase == orch::Phase::awaiting_syntax);

  // Same version, same tool again: rule violation, not a retry.
  orch::ModelTurn repeat = orch::parse_model_turn(
      fixtures::call_block("syntax_check", "v0 := by sorry"));
  auto outcome = orch::step(failed.state, repeat, tools, query, versions);
  CHECK(outcome.state.final_status == atf::TrajectoryStatus::failed_rule);
}

TEST_CASE("state machine: revisions exhaust the budget") {
  atf::RunConfig config;
  config.max_revisions = 2;  // budget 1: versions 0 and 1 only
  orch::LoopState state = orch::initial_state(config);
  std::vector<atf::FormalStatement> versions;
  auto tools = canned_tools(false, true);
  atf::MathQuery query = fixtures::case_study_query();

  for (int version = 0; version < 2; ++version) {
    std::string code = "v" + std::to_string(version) + " := by sorry";
    orch::ModelTurn turn = orch::parse_model_turn(
        fixtures::fenced(code) + "\n" +
        fixtures::call_block("syntax_check", code));
    auto outcome = orch::step(state, turn, tools, query, versions);
    state = outcome.state;
    CHECK_FALSE(state.terminal());
  }
  CHECK(versions.size() == 2);

  orch::ModelTurn third = orch::parse_model_turn(
      fixtures::fenced("v2 := by sorry") + "\n" +
      fixtures::call_block("syntax_check", "v2 := by sorry"));
  auto outcome = orch::step(state, third, tools, query, versions);
  CHECK(outcome.state.final_status == atf::TrajectoryStatus::failed_budget);
  // The over-budget version is not recorded.
  CHECK(versions.size() == 2);
  CHECK_FALSE(outcome.recorded_version.has_value());
}

TEST_CASE("state machine: invocation code must match the current version") {
  atf::RunConfig config;
  orch::LoopState state = orch::initial_state(config);
  std::vector<atf::FormalStatement> versions;
  auto tools = canned_tools(true, true);
  atf::MathQuery query = fixtures::case_study_query();

  orch::ModelTurn mismatched = orch::parse_model_turn(
      fixtures::fenced("v0 := by sorry") + "\n" +
      fixtures::call_block("syntax_check", "something else"));
  auto outcome = orch::step(state, mismatched, tools, query, versions);
  CHECK(outcome.state.final_status == atf::TrajectoryStatus::failed_rule);
}

TEST_CASE("state machine: two consecutive chatter turns give up") {
  atf::RunConfig config;
  orch::LoopState state = orch::initial_state(config);
  std::vector<atf::FormalStatement> versions;
  auto tools = canned_tools(true, true);
  atf::MathQuery query = fixtures::case_study_query();

  orch::ModelTurn chatter = orch::parse_model_turn("Hmm, let me think.");
  auto once = orch::step(state, chatter, tools, query, versions);
  CHECK_FALSE(once.state.terminal());
  auto twice = orch::step(once.state, chatter, tools, query, versions);
  CHECK(twice.state.final_status == atf::TrajectoryStatus::failed_rule);
}

TEST_CASE("formalize replays the case study end to end") {
  atf::RunConfig config;
  auto model = fixtures::case_study_model_client();
  auto lean = std::shared_ptr<backends::ScriptedLeanClient>(
      fixtures::case_study_lean_client());
  auto tools = case_study_tools(lean, fixtures::case_study_judges(), config);

  atf::Trajectory t = orch::formalize(fixtures::case_study_query(), *model,
                                      tools, config);
  CHECK(t.status == atf::TrajectoryStatus::success);
  CHECK(t.revision_count == 1);
  REQUIRE(t.statements.size() == 2);
  CHECK(t.statements[0].code == fixtures::kCaseStudyV0);
  CHECK(t.statements[1].code == fixtures::kCaseStudyV1);

  // model, result, model, result, model, result, closing model turn
  REQUIRE(t.steps.size() == 7);
  CHECK(t.steps[1].result->tool == atf::ToolKind::syntax_check);
  CHECK_FALSE(t.steps[1].result->syntax->pass);
  CHECK(t.steps[3].result->syntax->pass);
  CHECK(t.steps[5].result->tool == atf::ToolKind::consistency_check);
  CHECK(t.steps[5].result->consistency->pass);
  CHECK(t.steps[6].kind == atf::StepKind::model_turn);
  CHECK_FALSE(t.steps[6].invocation.has_value());

  CHECK(t.steps[1].text.find(fixtures::kSyntaxFailPayload) !=
        std::string::npos);
  CHECK(t.steps[3].text.find(fixtures::kSyntaxPassPayload) !=
        std::string::npos);

  auto ruling = orch::validate_trajectory(t);
  CHECK(ruling.compliant);
  CHECK(model->remaining() == 0);
}

TEST_CASE("formalize aborts when the model stays down") {
  atf::RunConfig config;
  backends::ScriptedChatClient model({
      {backends::RequestMatch::any(), "", atf::FaultKind::timeout, "t"},
      {backends::RequestMatch::any(), "", atf::FaultKind::timeout, "t"},
  });
  auto tools = canned_tools(true, true);
  atf::Trajectory t = orch::formalize(fixtures::case_study_query(), model,
                                      tools, config);
  CHECK(t.status == atf::TrajectoryStatus::aborted);
  CHECK(t.statements.empty());
  CHECK(t.revision_count == 0);
}

TEST_CASE("formalize recovers from one transient model fault") {
  atf::RunConfig config;
  std::string final_turn =
      fixtures::fenced("v0 := by sorry") + "\n" +
      fixtures::call_block("syntax_check", "v0 := by sorry");
  backends::ScriptedChatClient model({
      {backends::RequestMatch::any(), "", atf::FaultKind::transport, "blip"},
      {backends::RequestMatch::any(), final_turn},
      {backends::RequestMatch::any(),
       fixtures::call_block("consistency_check", "v0 := by sorry")},
      {backends::RequestMatch::any(),
       "**Final Statement**\n" + fixtures::fenced("v0 := by sorry")},
  });
  auto tools = canned_tools(true, true);
  atf::Trajectory t = orch::formalize(fixtures::case_study_query(), model,
                                      tools, config);
  CHECK(t.status == atf::TrajectoryStatus::success);
}

TEST_CASE("a closing turn that contradicts the final version fails the rules") {
  atf::RunConfig config;
  backends::ScriptedChatClient model({
      {backends::RequestMatch::any(),
       fixtures::fenced("v0 := by sorry") + "\n" +
           fixtures::call_block("syntax_check", "v0 := by sorry")},
      {backends::RequestMatch::any(),
       fixtures::call_block("consistency_check", "v0 := by sorry")},
      {backends::RequestMatch::any(),
       "**Final Statement**\n" + fixtures::fenced("different := by sorry")},
  });
  auto tools = canned_tools(true, true);
  atf::Trajectory t = orch::formalize(fixtures::case_study_query(), model,
                                      tools, config);
  CHECK(t.status == atf::TrajectoryStatus::failed_rule);
  // Both checks succeeded, so the validator still accepts the record.
  CHECK(orch::validate_trajectory(t).compliant);
}

TEST_CASE("validator rejects tampered trajectories") {
  atf::RunConfig config;
  auto model = fixtures::case_study_model_client();
  auto lean = std::shared_ptr<backends::ScriptedLeanClient>(
      fixtures::case_study_lean_client());
  auto tools = case_study_tools(lean, fixtures::case_study_judges(), config);
  atf::Trajectory good = orch::formalize(fixtures::case_study_query(), *model,
                                         tools, config);
  REQUIRE(orch::validate_trajectory(good).compliant);

  atf::Trajectory wrong_count = good;
  wrong_count.revision_count = 5;
  CHECK_FALSE(orch::validate_trajectory(wrong_count).compliant);

  atf::Trajectory status_lie = good;
  status_lie.steps[5].result->consistency->pass = false;
  CHECK_FALSE(orch::validate_trajectory(status_lie).compliant);

  atf::Trajectory reordered = good;
  std::swap(reordered.steps[1], reordered.steps[5]);
  CHECK_FALSE(orch::validate_trajectory(reordered).compliant);

  atf::Trajectory code_swap = good;
  code_swap.steps[0].invocation->code = "swapped := by sorry";
  CHECK_FALSE(orch::validate_trajectory(code_swap).compliant);
}
