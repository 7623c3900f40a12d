#include "atf/judge/consistency.hpp"

#include <algorithm>
#include <cctype>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "atf/errors.hpp"
#include "atf/prompts.hpp"

namespace atf::judge {

namespace {

// Top-level {...} spans, scanned string-aware.
std::vector<std::pair<size_t, size_t>> object_spans(const std::string& text) {
  std::vector<std::pair<size_t, size_t>> spans;
  int depth = 0;
  size_t start = 0;
  bool in_string = false;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      if (depth > 0) in_string = true;
      continue;
    }
    if (c == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (c == '}') {
      if (depth > 0 && --depth == 0) {
        spans.emplace_back(start, i + 1);
      }
    }
  }
  return spans;
}

bool ruling_from_value(const nlohmann::json& value, Ruling& out) {
  std::string text;
  if (value.is_string()) {
    text = value.get<std::string>();
  } else if (value.is_array() && value.size() == 1 && value[0].is_string()) {
    text = value[0].get<std::string>();
  } else {
    return false;
  }
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (text == "correct") {
    out = Ruling::consistent;
    return true;
  }
  if (text == "incorrect") {
    out = Ruling::inconsistent;
    return true;
  }
  return false;
}

JudgeVerdict query_judge(const Judge& judge, const std::string& prompt,
                         const ConsistencyOptions& options,
                         std::atomic<long>* judge_calls) {
  std::vector<backends::Message> messages{{"user", prompt}};
  for (int attempt = 0; attempt <= options.transport_retries; ++attempt) {
    try {
      if (judge_calls) judge_calls->fetch_add(1);
      std::string raw = judge.client->chat(messages, judge.params);
      JudgeVerdict verdict = parse_judge_response(raw);
      verdict.judge_id = judge.id;
      return verdict;
    } catch (const BackendFault& fault) {
      if (fault.retryable() && attempt < options.transport_retries) continue;
      JudgeVerdict verdict;
      verdict.judge_id = judge.id;
      verdict.ruling = Ruling::unparseable;
      verdict.raw = std::string("judge unavailable (") +
                    to_string(fault.kind()) + "): " + fault.what();
      return verdict;
    }
  }
  JudgeVerdict verdict;  // unreachable, loop always returns
  verdict.judge_id = judge.id;
  return verdict;
}

}  // namespace

JudgeVerdict parse_judge_response(const std::string& raw) {
  JudgeVerdict verdict;
  verdict.raw = raw;
  verdict.ruling = Ruling::unparseable;
  auto spans = object_spans(raw);
  for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(
          raw.substr(it->first, it->second - it->first));
    } catch (const nlohmann::json::parse_error&) {
      continue;
    }
    if (!parsed.is_object() || !parsed.contains("is_assistant_correct")) {
      continue;
    }
    Ruling ruling;
    if (!ruling_from_value(parsed["is_assistant_correct"], ruling)) {
      return verdict;  // schema present but value unusable
    }
    verdict.ruling = ruling;
    if (parsed.contains("reasons") && parsed["reasons"].is_string()) {
      verdict.explanation = parsed["reasons"].get<std::string>();
    }
    return verdict;
  }
  return verdict;
}

ConsistencyReport ensemble_vote(const std::vector<JudgeVerdict>& verdicts) {
  if (verdicts.empty()) {
    throw EmptyPanel("consistency vote over an empty judge panel");
  }
  ConsistencyReport report;
  report.per_judge = verdicts;
  report.pass = std::all_of(verdicts.begin(), verdicts.end(),
                            [](const JudgeVerdict& v) {
                              return v.ruling == Ruling::consistent;
                            });
  const JudgeVerdict* chosen = &verdicts.front();
  if (!report.pass) {
    auto inconsistent = std::find_if(verdicts.begin(), verdicts.end(),
                                     [](const JudgeVerdict& v) {
                                       return v.ruling == Ruling::inconsistent;
                                     });
    if (inconsistent != verdicts.end()) {
      chosen = &*inconsistent;
    } else {
      auto bad = std::find_if(verdicts.begin(), verdicts.end(),
                              [](const JudgeVerdict& v) {
                                return v.ruling != Ruling::consistent;
                              });
      chosen = &*bad;
    }
  }
  report.explanations = chosen->explanation;
  return report;
}

ConsistencyReport run_consistency_check(const MathQuery& query,
                                        const FormalStatement& statement,
                                        const std::vector<Judge>& judges,
                                        bool syntax_passed,
                                        const ConsistencyOptions& options,
                                        std::atomic<long>* judge_calls) {
  if (!syntax_passed) {
    throw DomainError(
        "consistency check requested for a statement that has not passed "
        "syntax check");
  }
  if (judges.empty()) {
    throw EmptyPanel("no consistency judges configured");
  }
  std::string prompt = prompts::render_judge_prompt(query, statement);
  std::vector<JudgeVerdict> verdicts(judges.size());
  const int64_t n = static_cast<int64_t>(judges.size());
#ifdef _OPENMP
  if (options.workers > 1) omp_set_num_threads(options.workers);
#pragma omp parallel for schedule(static) if (options.workers != 1 && n > 1)
#endif
  for (int64_t i = 0; i < n; ++i) {
    verdicts[static_cast<size_t>(i)] = query_judge(
        judges[static_cast<size_t>(i)], prompt, options, judge_calls);
  }
  return ensemble_vote(verdicts);
}

}  // namespace atf::judge
