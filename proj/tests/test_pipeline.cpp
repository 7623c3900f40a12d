#include <string>
#include <vector>

#include <doctest.h>

#include "atf/backends/mocks.hpp"
#include "atf/errors.hpp"
#include "atf/orch/loop.hpp"
#include "atf/pipeline/ops.hpp"
#include "atf/prompts.hpp"
#include "fixtures.hpp"

namespace pipeline = atf::pipeline;
namespace orch = atf::orch;

namespace {

atf::SyntaxReport passing() {
  atf::SyntaxReport r;
  r.pass = true;
  return r;
}

atf::SyntaxReport failing() {
  atf::SyntaxReport r;
  r.pass = false;
  return r;
}

// A compliant success trajectory with the requested number of revisions,
// built by driving the real loop with canned tools.
atf::Trajectory success_with_revisions(const std::string& query_id,
                                       int revisions) {
  atf::RunConfig config;
  config.max_revisions = revisions + 2;
  std::vector<atf::backends::ChatScriptEntry> script;
  for (int v = 0; v <= revisions; ++v) {
    std::string code = "theorem v" + std::to_string(v) + " : True := by sorry";
    script.push_back({atf::backends::RequestMatch::any(),
                      fixtures::fenced(code) + "\n" +
                          fixtures::call_block("syntax_check", code)});
  }
  std::string final_code =
      "theorem v" + std::to_string(revisions) + " : True := by sorry";
  script.push_back({atf::backends::RequestMatch::any(),
                    fixtures::call_block("consistency_check", final_code)});
  script.push_back({atf::backends::RequestMatch::any(),
                    "**Final Statement**\n" + fixtures::fenced(final_code)});
  atf::backends::ScriptedChatClient model(std::move(script));

  int syntax_calls = 0;
  orch::ToolSet tools;
  tools.syntax = [&syntax_calls, revisions](const atf::FormalStatement&) {
    atf::SyntaxReport r;
    r.pass = syntax_calls == revisions;  // fail until the last version
    ++syntax_calls;
    return r;
  };
  tools.consistency = [](const atf::MathQuery&, const atf::FormalStatement&) {
    atf::ConsistencyReport r;
    r.pass = true;
    return r;
  };

  atf::MathQuery query{query_id, "Prove the thing labeled " + query_id, ""};
  atf::Trajectory t = orch::formalize(query, model, tools, config);
  REQUIRE(t.status == atf::TrajectoryStatus::success);
  REQUIRE(t.revision_count == revisions);
  return t;
}

atf::Trajectory failed_trajectory(const std::string& query_id) {
  atf::Trajectory t;
  t.query = {query_id, "Prove the thing labeled " + query_id, ""};
  t.status = atf::TrajectoryStatus::failed_budget;
  return t;
}

}  // namespace

TEST_CASE("similarity band boundaries") {
  pipeline::SimilarityBand band = pipeline::SimilarityBand::near_duplicates();
  CHECK(band.contains(0.95));
  CHECK(band.contains(0.99));
  CHECK_FALSE(band.contains(1.0));
  CHECK_FALSE(band.contains(0.9499999));

  pipeline::SimilarityBand reject =
      pipeline::SimilarityBand::below_rejection_threshold();
  CHECK(reject.contains(0.0));
  CHECK(reject.contains(0.95));
  CHECK_FALSE(reject.contains(0.950001));
}

TEST_CASE("perturbation filtering keeps close, valid, distinct negatives") {
  atf::FormalStatement positive{
      "theorem t : 1 + 1 = 2 \xe2\x88\xa7 2 + 2 = 4 \xe2\x88\xa7 3 + 3 = 6 "
      ":= by sorry"};
  std::vector<atf::FormalStatement> candidates{
      {"theorem t : 1 + 1 = 2 \xe2\x88\xa7 2 + 2 = 4 \xe2\x88\xa7 3 + 3 = 7 "
       ":= by sorry"},  // near duplicate
      {"theorem t : 1 + 1 = 2 \xe2\x88\xa7 2 + 2 = 4 \xe2\x88\xa7 3 + 3 = 7 "
       ":= by sorry"},  // exact repeat of the previous candidate
      {"theorem t : 1 + 1 = 2 \xe2\x88\xa7 2 + 2 = 4 \xe2\x88\xa7 3 + 3 = 6 "
       ":= by sorry"},  // identical to the positive
      {"theorem t : 1 + 1 = 2 \xe2\x88\xa7 2 + 2 = 5 \xe2\x88\xa7 3 + 3 = 7 "
       ":= by sorry"},  // in band
      {"theorem u : completely different := by sorry"},  // too far
      {"theorem t : 1 + 1 = 2 \xe2\x88\xa7 2 + 2 = 4 \xe2\x88\xa7 3 + 3 = 9 "
       ":= by sorry"},  // in band but fails syntax
  };
  std::vector<atf::SyntaxReport> reports{passing(), passing(), passing(),
                                         passing(), passing(), failing()};

  auto kept = pipeline::filter_perturbations(positive, candidates, reports,
                                             pipeline::SimilarityBand::
                                                 near_duplicates(),
                                             2);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].similarity >= kept[1].similarity);
  CHECK(kept[0].candidate.code != kept[1].candidate.code);
  for (const auto& c : kept) {
    CHECK(c.syntax_valid);
    CHECK_FALSE(c.label_consistent);
    CHECK(c.candidate.code != positive.code);
  }

  CHECK_THROWS_AS(
      pipeline::filter_perturbations(positive, candidates, reports,
                                     pipeline::SimilarityBand::
                                         near_duplicates(),
                                     4),
      atf::InsufficientCandidates);
  CHECK_THROWS_AS(
      pipeline::filter_perturbations(positive, candidates, {passing()}, {},
                                     1),
      atf::DomainError);
}

TEST_CASE("perturbation prompt embeds the source statement") {
  atf::FormalStatement s{"theorem t : True := by sorry"};
  std::string prompt = atf::prompts::render_perturbation_prompt(s);
  CHECK(prompt.find(s.code) != std::string::npos);
  CHECK(prompt.find("{formal_statement}") == std::string::npos);
}

TEST_CASE("cold-start upsampling repeats hard trajectories adjacently") {
  std::vector<atf::Trajectory> trajectories{
      success_with_revisions("easy", 0),
      success_with_revisions("hard", 2),
      success_with_revisions("medium", 1),
  };
  auto upsampled = pipeline::upsample_cold_start(trajectories, 3);
  REQUIRE(upsampled.size() == 5);
  CHECK(upsampled[0].query.id == "easy");
  CHECK(upsampled[1].query.id == "hard");
  CHECK(upsampled[2].query.id == "hard");
  CHECK(upsampled[3].query.id == "hard");
  CHECK(upsampled[4].query.id == "medium");

  CHECK(pipeline::upsample_cold_start(trajectories, 1).size() == 3);
  CHECK_THROWS_AS(pipeline::upsample_cold_start(trajectories, 0),
                  atf::ConfigError);
}

TEST_CASE("expert iteration keeps the boundary revision and not past it") {
  std::vector<atf::Trajectory> trajectories{
      success_with_revisions("seven", 7),
      success_with_revisions("zero", 0),
      failed_trajectory("gave-up"),
  };
  // Eight revisions under a cap of eight is out.
  atf::Trajectory eight = success_with_revisions("eight", 8);
  trajectories.push_back(eight);
  // A tampered record is success but non-compliant.
  atf::Trajectory tampered = success_with_revisions("tampered", 0);
  tampered.revision_count = 3;
  trajectories.push_back(tampered);

  auto split = pipeline::filter_expert_iteration(trajectories, 8);
  REQUIRE(split.kept.size() == 2);
  CHECK(split.kept[0].query.id == "seven");
  CHECK(split.kept[1].query.id == "zero");
  CHECK(split.retry_pool ==
        std::vector<std::string>{"gave-up", "eight", "tampered"});
}

TEST_CASE("training serialization masks tool results") {
  atf::Trajectory t = success_with_revisions("mask-me", 1);
  std::string text = pipeline::serialize_for_training(t);
  CHECK(text.find(t.query.text) != std::string::npos);
  CHECK(text.find("<tool_result>") != std::string::npos);

  auto sft = pipeline::annotate_loss_masks(t, pipeline::MaskMode::sft);
  REQUIRE(sft.size() == 3);  // fail, pass, consistency pass
  for (const auto& span : sft) {
    CHECK(span.kind == pipeline::MaskKind::tool_result);
    CHECK(text.compare(span.start, 13, "<tool_result>") == 0);
    CHECK(text.compare(span.end - 14, 14, "</tool_result>") == 0);
  }

  auto dpo = pipeline::annotate_loss_masks(t, pipeline::MaskMode::dpo);
  CHECK(dpo.size() == 6);  // three invocations on top of the results
  size_t call_spans = 0;
  for (const auto& span : dpo) {
    if (span.kind == pipeline::MaskKind::tool_invocation) {
      ++call_spans;
      CHECK(text.compare(span.start, 10, "<tool_call") == 0);
    }
  }
  CHECK(call_spans == 3);

  // Every sft span appears verbatim in the dpo set.
  for (const auto& span : sft) {
    bool found = false;
    for (const auto& other : dpo) {
      found = found || (other.start == span.start && other.end == span.end);
    }
    CHECK(found);
  }
}

TEST_CASE("corrupted tool result text is a serialization error") {
  atf::Trajectory t = success_with_revisions("corrupt", 0);
  for (auto& step : t.steps) {
    if (step.kind == atf::StepKind::tool_result) {
      step.text = "Output: stripped tags";
      break;
    }
  }
  CHECK_THROWS_AS(pipeline::annotate_loss_masks(t, pipeline::MaskMode::sft),
                  atf::SerializationMismatch);
}

TEST_CASE("grouping preserves first-appearance query order") {
  std::vector<atf::Trajectory> trajectories{
      success_with_revisions("b", 0), success_with_revisions("a", 0),
      success_with_revisions("b", 1)};
  auto groups = pipeline::group_by_query(trajectories);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].first == "b");
  CHECK(groups[0].second.size() == 2);
  CHECK(groups[1].first == "a");
}

TEST_CASE("dpo mining pairs extremes when the gap is wide enough") {
  std::vector<atf::Trajectory> trajectories{
      success_with_revisions("wide", 0),
      success_with_revisions("wide", 4),
      success_with_revisions("wide", 2),
      success_with_revisions("narrow", 1),
      success_with_revisions("narrow", 3),
      success_with_revisions("exact", 0),
      success_with_revisions("exact", 3),
  };
  // Failures never pair, even at a large gap.
  trajectories.push_back(failed_trajectory("wide"));

  auto pairs =
      pipeline::mine_dpo_pairs(pipeline::group_by_query(trajectories), 3);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].query_id == "wide");
  CHECK(pairs[0].chosen.revision_count == 0);
  CHECK(pairs[0].rejected.revision_count == 4);
  CHECK(pairs[0].attempt_gap == 4);
  CHECK(pairs[1].query_id == "exact");
  CHECK(pairs[1].attempt_gap == 3);
}

TEST_CASE("dpo mining breaks ties toward the earliest trajectory") {
  atf::Trajectory first_low = success_with_revisions("tie", 0);
  first_low.steps[0].text += " marker-first";
  atf::Trajectory second_low = success_with_revisions("tie", 0);
  atf::Trajectory high = success_with_revisions("tie", 3);

  auto pairs = pipeline::mine_dpo_pairs(
      pipeline::group_by_query({first_low, second_low, high}), 3);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].chosen.steps[0].text.find("marker-first") !=
        std::string::npos);
}
