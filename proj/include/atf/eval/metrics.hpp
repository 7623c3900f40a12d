#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atf/backends/clients.hpp"
#include "atf/types.hpp"

namespace atf::eval {

// Unbiased estimator 1 - C(n-c, k)/C(n, k) in stable product form.
double pass_at_k(int n, int c, int k);

struct SampleOutcome {
  std::string query_id;
  int sample_index = 0;
  bool syntax_pass = false;
  bool consistency_pass = false;  // implies syntax_pass
  int tool_calls = 0;
  int revisions = 0;
};

// Final-version outcome of one orchestrator run.
SampleOutcome outcome_of(const Trajectory& trajectory, int sample_index = 0);
std::vector<SampleOutcome> outcomes_from_trajectories(
    const std::vector<Trajectory>& trajectories);

struct RateRow {
  int k = 1;
  double syntax_rate = 0.0;       // mean pass@k over queries, syntax gate
  double consistency_rate = 0.0;  // both gates
};

// Requires a uniform per-query sample count; RaggedSamples otherwise.
std::vector<RateRow> aggregate_rates(const std::vector<SampleOutcome>& outcomes,
                                     const std::vector<int>& k_values);

std::string render_rate_table(const std::vector<RateRow>& rows);

struct ConfusionCounts {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;
};

// Each metric is empty when its denominator is zero.
struct ConfusionMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> fnr;
  std::optional<double> tnr;
  std::optional<double> fpr;
};

ConfusionMetrics confusion_metrics(const ConfusionCounts& counts);

// Product-moment correlation; DegenerateInput on n < 2, length mismatch or
// zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// Stable first-occurrence dedup on whitespace-collapsed query text.
std::vector<MathQuery> dedup_queries(const std::vector<MathQuery>& queries);

struct DecontaminationResult {
  std::vector<MathQuery> kept;
  std::vector<MathQuery> removed;
};

// Drops training queries whose max cosine against any benchmark query is
// strictly above the threshold.
DecontaminationResult decontaminate(const std::vector<MathQuery>& train,
                                    const std::vector<MathQuery>& bench,
                                    backends::EmbeddingClient& provider,
                                    double threshold = 0.8, int workers = 0);

struct ToolUsageStats {
  size_t trajectory_count = 0;
  double avg_tool_calls = 0.0;
  std::optional<double> syntax_success_rate;
  std::optional<double> consistency_success_rate;
  // revision index at check time -> pass rate
  std::map<int, double> consistency_success_by_attempt;
};

ToolUsageStats tool_usage_stats(const std::vector<Trajectory>& trajectories);

// Preference loss with an NLL anchor: softplus(-beta * (chosen_logratio -
// rejected_logratio)) - alpha * chosen_policy_logp.
double dpo_nll_loss(double chosen_logratio, double rejected_logratio,
                    double chosen_policy_logp, double beta = 0.1,
                    double alpha = 0.3);

}  // namespace atf::eval
