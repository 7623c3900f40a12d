#pragma once

#include <string>
#include <string_view>

#include "atf/types.hpp"

namespace atf::prompts {

// Instruction block for generating semantic perturbations of a statement.
// Contains a {formal_statement} placeholder.
extern const std::string_view kPerturbationPrompt;

// Instruction block for the consistency judges. The rendered prompt appends
// the math text and candidate code in marked sections.
extern const std::string_view kConsistencyJudgePrompt;

// System prompt used when synthesizing bootstrap training runs.
extern const std::string_view kColdStartSystemPrompt;

// System prompt used for plain inference runs.
extern const std::string_view kInferenceSystemPrompt;

std::string render_perturbation_prompt(const FormalStatement& statement);

std::string render_judge_prompt(const MathQuery& query,
                                const FormalStatement& statement);

}  // namespace atf::prompts
