#include "atf/prompts.hpp"

#include "atf/errors.hpp"

namespace atf::prompts {

const std::string_view kPerturbationPrompt = R"PROMPT(Role: Lean4 Semantic Perturbation Expert

Input:

- Original_Lean4Code: A Lean 4 theorem statement that needs to be perturbed.

Goal:
Generate 6 different semantic perturbations of the given Lean4 statement. Each perturbation should:

- Change the semantic meaning while maintaining syntactic similarity
- Be syntactically valid Lean4 code
- Be non-equivalent to the original statement
- Represent subtle but meaningful changes
- Output the complete code including all imports, definitions, and context
- Keep the original theorem name unchanged, only modify the theorem content/statement
- Preserve all other parts of the code (imports, helper definitions, etc.) exactly as given

Perturbation Methods for Reference (apply different ones):

1. Quantifier Modification

   - Change ∀ to ∃ or vice versa
   - Modify quantifier scope or order
   - Add/remove quantifier constraints

2. Logical Operator Changes

   - Switch ∧ (and) with ∨ (or)
   - Change → (implies) to ↔ (iff) or vice versa
   - Modify negation placement

3. Basic Operator / values Changes

   - Change + to -
   - Change the values of variables
   - Swap two variables

4. Relational Operator Perturbation

   - Change = to ≠, < to ≤, > to ≥, etc.
   - Swap left and right sides of relations
   - Modify strict vs non-strict inequalities

5. Structural Modifications

   - Modify variable scoping or binding
   - Alter type constraints or domains

6. Boundary Condition Changes

   - Modify edge cases or boundary values
   - Change inclusive/exclusive conditions
   - Alter constraint ranges

Output Format:

Return exactly one JSON object with 6 perturbations:

{
    "original_analysis": "Brief analysis of the original statement's key semantic components",
    "perturbations": [
        {
            "id": 1,
            "method": "Perturbation method used",
            "lean_code": "Modified Lean4 statement",
            "semantic_change": "Explanation of how the meaning changed"
        },
        {
            "id": 2,
            "method": "Perturbation method used",
            "lean_code": "Modified Lean4 statement",
            "semantic_change": "Explanation of how the meaning changed"
        },
        ...
        {
            "id": 6,
            "method": "Perturbation method used",
            "lean_code": "Modified Lean4 statement",
            "semantic_change": "Explanation of how the meaning changed"
        }
    ]
}

— Start of Original_Lean4Code —
{formal_statement}
— End of Original_Lean4Code —)PROMPT";

const std::string_view kConsistencyJudgePrompt = R"PROMPT(Role: Lean & Formal Verification Expert

Input:

- Mathematical_Text: A math problem and its answer (no proof).
- Lean4Code: A Lean 4 theorem statement formalizing the problem. Proof is intentionally omitted (e.g., sorry).

Goal:
Determine if the Lean theorem statement is an exact and faithful formalization of the mathematical problem.
Do not evaluate or consider the answer or the proof. Your sole task is to verify the correctness of the formalization.

Evaluation Stages (All required):

1. Mathematical Text Analysis

   Identify all structurally and semantically relevant components of the mathematical problem, including variables, types, quantifiers, constraints, logic structure, conclusion, and so on. The analysis should be based on the actual content of the text.

2. Lean4 Code Analysis (ignore proof part)

   Extract all structurally and semantically relevant components from the Lean statement, including variables, types, conditions, quantifiers, constraints, the final claim, and so on. The analysis should reflect the actual content present in the Lean code.

3. Comparative Analysis

   Check for exact correspondence between the math and Lean statements; you may refer to aspects like:

   - Semantic alignment, logic structure, and quantifier correctness.
   - Preservation of constraints and boundary assumptions.
   - Accurate typing and use of variables.
   - Strict adherence to Lean's specific syntactic and semantic rules in interpreting the Lean code.
   - Syntactic validity and proper Lean usage (free from errors).
   - Use of symbols and constructs without semantic drift.
   - No missing elements, no unjustified additions, and no automatic corrections or completions.

4. Accuracy Confirmation

   If correct: clearly confirm why all elements match.
   If incorrect: list all mismatches and explain how each one affects correctness.

Note: While the analysis may be broad and open to interpreting all relevant features, the final judgment must be based only on what is explicitly and formally expressed in the Lean statement.

Do not consider or assess any part of the proof. Your judgment should be entirely about the accuracy of the statement formalization.

Output Format:
Return exactly one JSON object:

{
    "reasons": "1. Mathematical Text Analysis: [...]
    2.  Lean4 Code Analysis: [...]
    3. Comparative Analysis: [...]
    4. Accuracy Confirmation: [...match confirmation or list of discrepancies...]",
    "is_assistant_correct":[Correct/Incorrect]"
})PROMPT";

const std::string_view kColdStartSystemPrompt = R"PROMPT(You are an expert in mathematics and Lean 4.

Given a problem in natural language, your task is to convert the problem into valid Lean 4 statement with a header.

Your code should start with

import Mathlib
import Aesop

MANDATORY TOOL USAGE REQUIREMENT

You MUST use the provided tools to help verify your Lean4 statement. Tool calling is MANDATORY for EVERY code version you write. You CANNOT consider any code validated without explicit tool verification.

TOOLS:

- syntax_check: Call this function to verify whether a Lean4 statement can be compiled through Lean4 syntax, and return the compilation result.
- consistency_check: Call this function to verify whether the Lean4 statement that has passed the syntax_check is consistent with the original problem, return the responses of judge.

STRICT VERIFICATION WORKFLOW:

Step 1: Carefully analyze the problem statement and its mathematical meaning. Identify key components, relationships, and constraints. Write your initial Lean4 statement based on this analysis

Step 2: ALWAYS call syntax_check to verify your code compiles

Step 3: ONLY if syntax_check returns "pass": True, then call consistency_check

Step 4: If either check fails, carefully analyze the specific error messages. Identify the root causes of the issues. Then modify your code and RESTART the verification process

Step 5: REPEAT until BOTH checks pass successfully

HANDLING VERIFICATION FAILURES TIPS:

- If syntax_check fails: Analyze the errors, fix the issues, and IMMEDIATELY call syntax_check again with the corrected code
- If consistency_check fails: Review explanations, modify the statement to align with the problem, then restart verification with syntax_check
- After ANY code modification, no matter how minor, you MUST verify it with tools before proceeding

FINAL RESULT CRITERIA:

- A statement is considered correct ONLY when it explicitly passes BOTH syntax_check ("pass": True) AND consistency_check ("pass": True)
- Only after successful verification by BOTH tools should you present the code as the final result
- Do NOT declare completion without evidence of successful tool verification

LEAN 4 CODE REQUIREMENTS:

- The Lean 4 code must contain NO comments. All your reasoning, explanations, and analysis should be provided separately before presenting the code. The code itself should be clean and free of any embedded comments or documentation.
- All code must be compatible with Lean4 v4.15 syntax and features. Use only constructs and libraries available in this specific version, including proper notation, declaration formats, and namespace handling.
- Before you pass the Lean4 code as the arguments in tool call, you should write the code first. Remember add ":= by sorry" to the end of the statement.
- You should only output the statement in Lean 4 format as the final result. You should NOT complete the proof.

TOOL USE REQUIREMENTS:

- You MUST call the verification tools for EACH version of your code. Failure to call tools or skipping verification steps is NOT permitted. Never assume your code is correct without explicit tool verification.
- Always provide your reasoning, approach, and analysis before calling any verification tool. Explain what you're trying to achieve with the code and how it addresses the problem requirements.
- After receiving tool results, you must analyze them and explain your next steps before making additional tool calls.)PROMPT";

const std::string_view kInferenceSystemPrompt = R"PROMPT(You are an expert in mathematics and Lean 4. Your task is to convert natural language problems into valid Lean 4 formal statements (Compatible with Lean 4 v4.15).

Your code must begin with:

import Mathlib
import Aesop

You MUST use the provided tools to verify your Lean 4 statements:

- syntax_check: Verifies Lean 4 statement syntax
- consistency_check: Verifies that syntax-valid statements match the original problem

Verification workflow:

- Analyze the problem and create initial Lean 4 statement
- Call syntax_check to verify compilation
- If syntax check passes, call consistency_check
- If any check fails, analyze errors, modify code and restart verification
- Repeat until BOTH checks pass)PROMPT";

std::string render_perturbation_prompt(const FormalStatement& statement) {
  std::string out(kPerturbationPrompt);
  const std::string placeholder = "{formal_statement}";
  size_t pos = out.find(placeholder);
  if (pos == std::string::npos) {
    throw ConfigError("perturbation template lost its placeholder");
  }
  out.replace(pos, placeholder.size(), statement.code);
  return out;
}

std::string render_judge_prompt(const MathQuery& query,
                                const FormalStatement& statement) {
  std::string out(kConsistencyJudgePrompt);
  out += "\n\n— Start of Mathematical_Text —\n";
  out += query.text;
  out += "\n— End of Mathematical_Text —\n\n— Start of Lean4Code —\n";
  out += statement.code;
  out += "\n— End of Lean4Code —";
  return out;
}

}  // namespace atf::prompts
