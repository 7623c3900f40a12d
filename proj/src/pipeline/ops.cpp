#include "atf/pipeline/ops.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "atf/errors.hpp"
#include "atf/kernels/similarity.hpp"
#include "atf/orch/loop.hpp"
#include "atf/orch/wire.hpp"
#include "atf/prompts.hpp"

namespace atf::pipeline {

double normalized_levenshtein(std::string_view a, std::string_view b) {
  return kernels::normalized_levenshtein(a, b);
}

bool SimilarityBand::contains(double similarity) const {
  bool above = low_inclusive ? similarity >= low : similarity > low;
  bool below = high_inclusive ? similarity <= high : similarity < high;
  return above && below;
}

SimilarityBand SimilarityBand::near_duplicates() {
  return SimilarityBand{0.95, 1.0, true, false};
}

SimilarityBand SimilarityBand::below_rejection_threshold() {
  return SimilarityBand{0.0, 0.95, true, true};
}

std::vector<PerturbationCandidate> filter_perturbations(
    const FormalStatement& positive,
    const std::vector<FormalStatement>& candidates,
    const std::vector<SyntaxReport>& syntax_reports,
    const SimilarityBand& band, size_t count) {
  if (candidates.size() != syntax_reports.size()) {
    throw DomainError("syntax reports are not aligned with candidates");
  }
  std::vector<PerturbationCandidate> survivors;
  std::set<std::string> seen;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (!syntax_reports[i].pass) continue;
    if (candidates[i].code == positive.code) continue;
    if (!seen.insert(candidates[i].code).second) continue;
    double similarity =
        normalized_levenshtein(positive.code, candidates[i].code);
    if (!band.contains(similarity)) continue;
    PerturbationCandidate survivor;
    survivor.positive = positive;
    survivor.candidate = candidates[i];
    survivor.similarity = similarity;
    survivor.syntax_valid = true;
    survivor.label_consistent = false;
    survivors.push_back(std::move(survivor));
  }
  std::stable_sort(survivors.begin(), survivors.end(),
                   [](const PerturbationCandidate& a,
                      const PerturbationCandidate& b) {
                     return a.similarity > b.similarity;
                   });
  if (survivors.size() < count) {
    throw InsufficientCandidates(
        "only " + std::to_string(survivors.size()) + " of " +
        std::to_string(count) + " requested negatives survive filtering");
  }
  survivors.resize(count);
  return survivors;
}

std::vector<Trajectory> upsample_cold_start(
    const std::vector<Trajectory>& trajectories, int factor) {
  if (factor < 1) throw ConfigError("upsample factor must be >= 1");
  std::vector<Trajectory> out;
  for (const auto& trajectory : trajectories) {
    int copies = trajectory.revision_count >= 2 ? factor : 1;
    for (int i = 0; i < copies; ++i) out.push_back(trajectory);
  }
  return out;
}

ExpertIterationSplit filter_expert_iteration(
    const std::vector<Trajectory>& trajectories, int max_revisions) {
  ExpertIterationSplit split;
  std::set<std::string> pooled;
  for (const auto& trajectory : trajectories) {
    bool keep = trajectory.status == TrajectoryStatus::success &&
                trajectory.revision_count < max_revisions &&
                orch::validate_trajectory(trajectory).compliant;
    if (keep) {
      split.kept.push_back(trajectory);
    } else if (pooled.insert(trajectory.query.id).second) {
      split.retry_pool.push_back(trajectory.query.id);
    }
  }
  return split;
}

const char* to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::tool_result: return "tool_result";
    case MaskKind::tool_invocation: return "tool_invocation";
  }
  return "tool_result";
}

std::string serialize_for_training(const Trajectory& trajectory) {
  std::string text(prompts::kInferenceSystemPrompt);
  text += "\n";
  text += trajectory.query.text;
  for (const auto& step : trajectory.steps) {
    text += "\n";
    text += step.text;
  }
  return text;
}

namespace {

// Last complete call block inside one step text, as [start, end) offsets.
bool find_call_span(const std::string& text, size_t& start, size_t& end) {
  bool found = false;
  for (auto [open_tag, close_tag] :
       {std::pair{orch::kToolCallOpen, orch::kToolCallClose},
        std::pair{orch::kToolCallsOpen, orch::kToolCallsClose}}) {
    size_t open = text.rfind(open_tag);
    if (open == std::string::npos) continue;
    size_t close = text.find(close_tag, open);
    if (close == std::string::npos) continue;
    size_t span_end = close + std::string(close_tag).size();
    if (!found || open > start) {
      start = open;
      end = span_end;
      found = true;
    }
  }
  return found;
}

bool starts_with(const std::string& text, const char* prefix) {
  return text.rfind(prefix, 0) == 0;
}

bool ends_with(const std::string& text, const char* suffix) {
  std::string s(suffix);
  return text.size() >= s.size() &&
         text.compare(text.size() - s.size(), s.size(), s) == 0;
}

}  // namespace

std::vector<MaskSpan> annotate_loss_masks(const Trajectory& trajectory,
                                          MaskMode mode) {
  std::vector<MaskSpan> spans;
  size_t offset = std::string(prompts::kInferenceSystemPrompt).size() + 1 +
                  trajectory.query.text.size();
  for (const auto& step : trajectory.steps) {
    size_t step_start = offset + 1;  // the joining newline
    if (step.kind == StepKind::tool_result) {
      if (!starts_with(step.text, orch::kToolResultOpen) ||
          !ends_with(step.text, orch::kToolResultClose)) {
        throw SerializationMismatch(
            "tool result step is not wrapped in result tags");
      }
      spans.push_back(MaskSpan{step_start, step_start + step.text.size(),
                               MaskKind::tool_result});
    } else if (mode == MaskMode::dpo && step.invocation) {
      size_t start = 0, end = 0;
      if (!find_call_span(step.text, start, end)) {
        throw SerializationMismatch(
            "model turn claims an invocation but has no call block");
      }
      spans.push_back(MaskSpan{step_start + start, step_start + end,
                               MaskKind::tool_invocation});
    }
    offset = step_start + step.text.size();
  }
  return spans;
}

std::vector<std::pair<std::string, std::vector<Trajectory>>> group_by_query(
    const std::vector<Trajectory>& trajectories) {
  std::vector<std::pair<std::string, std::vector<Trajectory>>> groups;
  std::map<std::string, size_t> index;
  for (const auto& trajectory : trajectories) {
    auto it = index.find(trajectory.query.id);
    if (it == index.end()) {
      index[trajectory.query.id] = groups.size();
      groups.emplace_back(trajectory.query.id, std::vector<Trajectory>{});
      it = index.find(trajectory.query.id);
    }
    groups[it->second].second.push_back(trajectory);
  }
  return groups;
}

std::vector<DpoPair> mine_dpo_pairs(
    const std::vector<std::pair<std::string, std::vector<Trajectory>>>& groups,
    int min_gap) {
  std::vector<DpoPair> pairs;
  for (const auto& [query_id, trajectories] : groups) {
    const Trajectory* chosen = nullptr;
    const Trajectory* rejected = nullptr;
    for (const auto& trajectory : trajectories) {
      if (trajectory.status != TrajectoryStatus::success) continue;
      if (!chosen || trajectory.revision_count < chosen->revision_count) {
        chosen = &trajectory;
      }
      if (!rejected || trajectory.revision_count > rejected->revision_count) {
        rejected = &trajectory;
      }
    }
    if (!chosen || !rejected) continue;
    int gap = rejected->revision_count - chosen->revision_count;
    if (gap < min_gap) continue;
    DpoPair pair;
    pair.query_id = query_id;
    pair.chosen = *chosen;
    pair.rejected = *rejected;
    pair.attempt_gap = gap;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace atf::pipeline
