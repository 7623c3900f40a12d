#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "atf/backends/clients.hpp"
#include "atf/types.hpp"

namespace atf::judge {

// Extracts the last schema-bearing JSON object from a judge's output.
// "Correct"/"Incorrect" (case-insensitive, bare or in a one-element array)
// become consistent/inconsistent; everything else is unparseable.
JudgeVerdict parse_judge_response(const std::string& raw);

// Ordered vote: pass only when every judge ruled consistent. The report's
// explanation comes from the highest-priority judge ruling inconsistent, or
// from the top judge when the panel agrees. Unparseable counts against.
ConsistencyReport ensemble_vote(const std::vector<JudgeVerdict>& verdicts);

struct Judge {
  std::string id;
  std::shared_ptr<backends::ChatClient> client;
  backends::ChatParams params;
};

struct ConsistencyOptions {
  int transport_retries = 1;  // per judge, retryable faults only
  int workers = 0;
};

// Renders one prompt, queries every judge independently, votes. A judge that
// keeps failing contributes an unparseable verdict instead of aborting the
// panel. `syntax_passed` asserts the caller ran the syntax gate first.
ConsistencyReport run_consistency_check(
    const MathQuery& query, const FormalStatement& statement,
    const std::vector<Judge>& judges, bool syntax_passed = true,
    const ConsistencyOptions& options = {},
    std::atomic<long>* judge_calls = nullptr);

}  // namespace atf::judge
