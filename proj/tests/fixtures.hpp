// Shared fixture: the ladies'-club case study transcript, reduced to the
// pieces the engine consumes (query, statement versions, compiler error,
// judge output) plus scripted backends that replay it.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "atf/backends/mocks.hpp"
#include "atf/json_io.hpp"
#include "atf/judge/consistency.hpp"
#include "atf/orch/wire.hpp"
#include "atf/types.hpp"

namespace fixtures {

inline atf::MathQuery case_study_query() {
  atf::MathQuery q;
  q.id = "ladies-club";
  q.text =
      "There are 100 members in a ladies' club. Each lady has had tea (in "
      "private) with exactly 56 of the other members of the club. The Board, "
      "consisting of the 50 most distinguished ladies, has all had tea with "
      "one another. Prove that the entire club may be split into two groups "
      "in such a way that, within each group, any lady has had tea with any "
      "other.";
  return q;
}

// Both versions carry a trailing space after the theorem head and after the
// second conjunction line; the compiler output below refers to these bytes.
inline const std::string kCaseStudyV0 =
    "import Mathlib\n"
    "import Aesop\n"
    "\n"
    "theorem my_favorite_theorem : \n"
    "  \xe2\x88\x80 (G : SimpleGraph (Fin 100)) [DecidableRel G.Adj],\n"
    "  (\xe2\x88\x80 v : Fin 100, G.degree v = 56) \xe2\x86\x92\n"
    "  (\xe2\x88\x83 (S : Finset (Fin 100)), S.card = 50 \xe2\x88\xa7 "
    "\xe2\x88\x80 u v \xe2\x88\x88 S, G.Adj u v) \xe2\x86\x92\n"
    "  \xe2\x88\x83 (A B : Finset (Fin 100)), A \xe2\x88\xaa B = "
    "Finset.univ \xe2\x88\xa7 A \xe2\x88\xa9 B = \xe2\x88\x85 \xe2\x88\xa7 \n"
    "    (\xe2\x88\x80 u v \xe2\x88\x88 A, G.Adj u v) \xe2\x88\xa7 "
    "(\xe2\x88\x80 u v \xe2\x88\x88 B, G.Adj u v) := by sorry";

inline const std::string kCaseStudyV1 =
    "import Mathlib\n"
    "import Aesop\n"
    "\n"
    "theorem my_favorite_theorem : \n"
    "  \xe2\x88\x80 (G : SimpleGraph (Fin 100)) [DecidableRel G.Adj],\n"
    "  (\xe2\x88\x80 v : Fin 100, G.degree v = 56) \xe2\x86\x92\n"
    "  (\xe2\x88\x83 (S : Finset (Fin 100)), S.card = 50 \xe2\x88\xa7 "
    "\xe2\x88\x80 u \xe2\x88\x88 S, \xe2\x88\x80 v \xe2\x88\x88 S, "
    "G.Adj u v) \xe2\x86\x92\n"
    "  \xe2\x88\x83 (A B : Finset (Fin 100)), A \xe2\x88\xaa B = "
    "Finset.univ \xe2\x88\xa7 A \xe2\x88\xa9 B = \xe2\x88\x85 \xe2\x88\xa7 \n"
    "    (\xe2\x88\x80 u \xe2\x88\x88 A, \xe2\x88\x80 v \xe2\x88\x88 A, "
    "G.Adj u v) \xe2\x88\xa7 (\xe2\x88\x80 u \xe2\x88\x88 B, \xe2\x88\x80 "
    "v \xe2\x88\x88 B, G.Adj u v) := by sorry";

// Original-statement coordinates of the quantifier error in v0.
inline atf::Diagnostic case_study_error() {
  atf::Diagnostic d;
  d.severity = atf::Severity::error;
  d.start_line = 7;
  d.start_col = 48;
  d.end_line = 7;
  d.end_col = 50;
  d.message = "unexpected token '\xe2\x88\x88'; expected ','";
  return d;
}

// Same error in assembled-file coordinates: two header import lines plus the
// namespace line shift the statement body down by one net line.
inline atf::Diagnostic case_study_error_batch_coords() {
  atf::Diagnostic d = case_study_error();
  d.start_line = 8;
  d.end_line = 8;
  return d;
}

inline const std::string kCaseStudyExplanation =
    "1. Mathematical Text Analysis: The problem involves a graph of 100 "
    "nodes (club members) where each node has degree 56. There exists a "
    "subset S of 50 nodes (the Board) forming a clique. The goal is to "
    "partition the graph into two cliques A and B. Key elements: 100 "
    "members, degree 56 for all, a 50-node clique subset, and partitioning "
    "into two cliques.\n"
    "2. Lean4 Code Analysis: The theorem formalizes a SimpleGraph on Fin 100 "
    "(100 nodes). The premises require \xe2\x88\x80v, degree v = 56, and "
    "\xe2\x88\x83S (Finset) with |S|=50 and \xe2\x88\x80u,v \xe2\x88\x88 S, "
    "Adj u v. The conclusion requires \xe2\x88\x83" "A,B (Finsets) partitioning "
    "Finset.univ (A \xe2\x88\xaa B = univ, A \xe2\x88\xa9 B = \xe2\x88\x85) "
    "where \xe2\x88\x80u,v \xe2\x88\x88 A, Adj u v and similarly for B.\n"
    "3. Comparative Analysis: All structural elements match. The 100 members "
    "are modeled via Fin 100. The degree condition is correctly captured. "
    "The Board's clique is formalized via \xe2\x88\x83S with card 50 and "
    "mutual adjacency. The partition into two cliques is accurately "
    "represented via A and B with the required properties. No semantic drift "
    "or missing elements detected. Lean syntax is valid and precise.\n"
    "4. Accuracy Confirmation: The formalization is exact. All components of "
    "the problem (node count, degree, Board clique, partition into two "
    "cliques) are preserved without additions or omissions.";

// Wire payloads exactly as the engine must render them.
inline const std::string kSyntaxFailPayload =
    "{\n"
    "  \"pass\": false,\n"
    "  \"errors\": [\n"
    "    {\n"
    "      \"severity\": \"error\",\n"
    "      \"pos\": {\n"
    "        \"line\": 7,\n"
    "        \"column\": 48\n"
    "      },\n"
    "      \"endPos\": {\n"
    "        \"line\": 7,\n"
    "        \"column\": 50\n"
    "      },\n"
    "      \"data\": \"unexpected token '\xe2\x88\x88'; expected ','\"\n"
    "    }\n"
    "  ]\n"
    "}";

inline const std::string kSyntaxPassPayload =
    "{\n"
    "  \"pass\": true,\n"
    "  \"errors\": []\n"
    "}";

inline std::string call_block(const std::string& tool,
                              const std::string& code) {
  atf::json payload{{"name", tool}, {"arguments", {{"lean4_code", code}}}};
  return std::string(atf::orch::kToolCallsOpen) + "\n" + payload.dump(2) +
         "\n" + atf::orch::kToolCallsClose;
}

inline std::string fenced(const std::string& code) {
  return "```lean\n" + code + "\n```";
}

// The four model messages of the transcript, in reply order.
inline std::vector<std::string> case_study_model_turns() {
  return {
      "<think>\nLooking at this problem, I need to formalize a graph theory "
      "statement about partitioning a graph into two cliques.\n\n" +
          fenced(kCaseStudyV0) + "\n\n" +
          call_block("syntax_check", kCaseStudyV0),
      "The syntax check failed due to incorrect quantifier syntax. Let me "
      "correct this:\n\n" +
          fenced(kCaseStudyV1) + "\n\n" +
          call_block("syntax_check", kCaseStudyV1),
      "Now let me verify the consistency with the corrected code:\n\n" +
          call_block("consistency_check", kCaseStudyV1),
      "</think>\n\n**Final Statement**\n" + fenced(kCaseStudyV1),
  };
}

inline std::unique_ptr<atf::backends::ScriptedChatClient>
case_study_model_client() {
  std::vector<atf::backends::ChatScriptEntry> script;
  for (const std::string& turn : case_study_model_turns()) {
    script.push_back({atf::backends::RequestMatch::any(), turn});
  }
  return std::make_unique<atf::backends::ScriptedChatClient>(
      std::move(script));
}

// v0 and v1 compile as singleton groups; the script keys off the quantifier
// spelling that distinguishes them.
inline std::unique_ptr<atf::backends::ScriptedLeanClient>
case_study_lean_client() {
  std::vector<atf::backends::LeanScriptEntry> script;
  script.push_back(
      {atf::backends::RequestMatch::contains("\xe2\x88\x80 u v \xe2\x88\x88 S"),
       {case_study_error_batch_coords()}});
  script.push_back(
      {atf::backends::RequestMatch::contains(
           "\xe2\x88\x80 u \xe2\x88\x88 S, \xe2\x88\x80 v \xe2\x88\x88 S"),
       {}});
  return std::make_unique<atf::backends::ScriptedLeanClient>(
      std::move(script));
}

inline std::string judge_response(const std::string& verdict,
                                  const std::string& reasons) {
  atf::json body{{"reasons", reasons}, {"is_assistant_correct", verdict}};
  return "Working through the comparison step by step.\n" + body.dump(2);
}

inline std::vector<atf::judge::Judge> case_study_judges() {
  std::vector<atf::judge::Judge> judges;
  atf::judge::Judge first;
  first.id = "qwq-32b";
  first.client = std::make_shared<atf::backends::ScriptedChatClient>(
      std::vector<atf::backends::ChatScriptEntry>{
          {atf::backends::RequestMatch::any(),
           judge_response("Correct", kCaseStudyExplanation)}});
  judges.push_back(std::move(first));

  atf::judge::Judge second;
  second.id = "qwen3-32b";
  second.client = std::make_shared<atf::backends::ScriptedChatClient>(
      std::vector<atf::backends::ChatScriptEntry>{
          {atf::backends::RequestMatch::any(),
           judge_response("Correct", "The statement matches the problem.")}});
  judges.push_back(std::move(second));
  return judges;
}

}  // namespace fixtures
