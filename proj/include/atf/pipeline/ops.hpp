#pragma once

#include <string>
#include <utility>
#include <vector>

#include "atf/types.hpp"

namespace atf::pipeline {

// 1 - editdistance / max(len); 1.0 when both strings are empty.
double normalized_levenshtein(std::string_view a, std::string_view b);

// Half-open-by-default similarity window for perturbation negatives.
struct SimilarityBand {
  double low = 0.95;
  double high = 1.0;
  bool low_inclusive = true;
  bool high_inclusive = false;

  bool contains(double similarity) const;

  // Keep candidates with similarity in [0.95, 1.0).
  static SimilarityBand near_duplicates();
  // Alternate reading: reject anything above 0.95, keep [0, 0.95].
  static SimilarityBand below_rejection_threshold();
};

struct PerturbationCandidate {
  FormalStatement positive;
  FormalStatement candidate;
  double similarity = 0.0;
  bool syntax_valid = false;
  bool label_consistent = false;  // negatives by construction
};

// Keeps syntactically valid, pairwise-distinct candidates inside the band,
// sorted by similarity descending, at most `count`. Throws
// InsufficientCandidates when fewer survive.
std::vector<PerturbationCandidate> filter_perturbations(
    const FormalStatement& positive,
    const std::vector<FormalStatement>& candidates,
    const std::vector<SyntaxReport>& syntax_reports,
    const SimilarityBand& band = SimilarityBand::near_duplicates(),
    size_t count = 4);

// Trajectories with at least two revisions appear `factor` times, adjacent.
std::vector<Trajectory> upsample_cold_start(
    const std::vector<Trajectory>& trajectories, int factor = 2);

struct ExpertIterationSplit {
  std::vector<Trajectory> kept;
  std::vector<std::string> retry_pool;  // query ids, first-occurrence order
};

// kept = success + rule-compliant + revision_count < max_revisions.
ExpertIterationSplit filter_expert_iteration(
    const std::vector<Trajectory>& trajectories, int max_revisions = 8);

enum class MaskKind { tool_result, tool_invocation };

const char* to_string(MaskKind kind);

struct MaskSpan {
  size_t start = 0;
  size_t end = 0;  // exclusive
  MaskKind kind = MaskKind::tool_result;
};

enum class MaskMode { sft, dpo };

// Canonical training text: system prompt, query, then every step text,
// newline-joined.
std::string serialize_for_training(const Trajectory& trajectory);

// Character spans to exclude from the loss. sft masks tool result blocks;
// dpo additionally masks tool call blocks inside model turns. Throws
// SerializationMismatch when a step's tags cannot be located.
std::vector<MaskSpan> annotate_loss_masks(const Trajectory& trajectory,
                                          MaskMode mode);

struct DpoPair {
  std::string query_id;
  Trajectory chosen;
  Trajectory rejected;
  int attempt_gap = 0;
};

// Groups trajectories by query id, first-occurrence order preserved.
std::vector<std::pair<std::string, std::vector<Trajectory>>> group_by_query(
    const std::vector<Trajectory>& trajectories);

// Per query: chosen = fewest revisions, rejected = most (earliest on ties);
// the pair is emitted iff the revision gap reaches min_gap.
std::vector<DpoPair> mine_dpo_pairs(
    const std::vector<std::pair<std::string, std::vector<Trajectory>>>& groups,
    int min_gap = 3);

}  // namespace atf::pipeline
