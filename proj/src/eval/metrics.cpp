#include "atf/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "atf/errors.hpp"
#include "atf/kernels/similarity.hpp"

namespace atf::eval {

double pass_at_k(int n, int c, int k) {
  if (c < 0 || c > n) {
    throw DomainError("pass_at_k: c must satisfy 0 <= c <= n");
  }
  if (k < 1 || k > n) {
    throw DomainError("pass_at_k: k must satisfy 1 <= k <= n");
  }
  if (n - c < k) return 1.0;
  double product = 1.0;
  for (int i = 0; i < k; ++i) {
    product *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
  }
  return 1.0 - product;
}

SampleOutcome outcome_of(const Trajectory& trajectory, int sample_index) {
  SampleOutcome outcome;
  outcome.query_id = trajectory.query.id;
  outcome.sample_index = sample_index;
  outcome.tool_calls = count_tool_calls(trajectory);
  outcome.revisions = trajectory.revision_count;

  // Syntax standing of the final version: the last syntax report wins.
  int version = -1;
  int last_version = static_cast<int>(trajectory.statements.size()) - 1;
  bool final_syntax = false;
  for (const auto& step : trajectory.steps) {
    if (step.kind == StepKind::model_turn && step.statement_version) {
      version = *step.statement_version;
    }
    if (step.kind == StepKind::tool_result && step.result &&
        step.result->syntax && version == last_version) {
      final_syntax = step.result->syntax->pass;
    }
  }
  outcome.syntax_pass = final_syntax;
  outcome.consistency_pass = trajectory.status == TrajectoryStatus::success;
  if (outcome.consistency_pass) outcome.syntax_pass = true;
  return outcome;
}

std::vector<SampleOutcome> outcomes_from_trajectories(
    const std::vector<Trajectory>& trajectories) {
  std::vector<SampleOutcome> outcomes;
  std::map<std::string, int> next_index;
  outcomes.reserve(trajectories.size());
  for (const auto& trajectory : trajectories) {
    outcomes.push_back(
        outcome_of(trajectory, next_index[trajectory.query.id]++));
  }
  return outcomes;
}

std::vector<RateRow> aggregate_rates(const std::vector<SampleOutcome>& outcomes,
                                     const std::vector<int>& k_values) {
  struct QueryCounts {
    int n = 0;
    int c_syntax = 0;
    int c_consistency = 0;
  };
  std::vector<std::string> order;
  std::map<std::string, QueryCounts> per_query;
  for (const auto& outcome : outcomes) {
    if (outcome.consistency_pass && !outcome.syntax_pass) {
      throw DomainError("outcome for query '" + outcome.query_id +
                        "' passes consistency without syntax");
    }
    auto it = per_query.find(outcome.query_id);
    if (it == per_query.end()) {
      order.push_back(outcome.query_id);
      it = per_query.emplace(outcome.query_id, QueryCounts{}).first;
    }
    ++it->second.n;
    if (outcome.syntax_pass) ++it->second.c_syntax;
    if (outcome.consistency_pass) ++it->second.c_consistency;
  }
  if (order.empty()) return {};
  int n = per_query[order.front()].n;
  for (const auto& id : order) {
    if (per_query[id].n != n) {
      throw RaggedSamples("query '" + id + "' has " +
                          std::to_string(per_query[id].n) +
                          " samples; expected " + std::to_string(n));
    }
  }
  std::vector<RateRow> rows;
  for (int k : k_values) {
    RateRow row;
    row.k = k;
    double syntax_sum = 0.0;
    double consistency_sum = 0.0;
    for (const auto& id : order) {
      const auto& counts = per_query[id];
      syntax_sum += pass_at_k(n, counts.c_syntax, k);
      consistency_sum += pass_at_k(n, counts.c_consistency, k);
    }
    row.syntax_rate = syntax_sum / static_cast<double>(order.size());
    row.consistency_rate = consistency_sum / static_cast<double>(order.size());
    rows.push_back(row);
  }
  return rows;
}

std::string render_rate_table(const std::vector<RateRow>& rows) {
  std::ostringstream out;
  out << "      k   syntax  consistency\n";
  out.setf(std::ios::fixed);
  out.precision(4);
  for (const auto& row : rows) {
    out.width(7);
    out << row.k << "   " << row.syntax_rate << "  " << "     "
        << row.consistency_rate << "\n";
  }
  return out.str();
}

ConfusionMetrics confusion_metrics(const ConfusionCounts& counts) {
  if (counts.tp < 0 || counts.fp < 0 || counts.tn < 0 || counts.fn < 0) {
    throw DomainError("confusion counts must be non-negative");
  }
  ConfusionMetrics metrics;
  if (counts.tp + counts.fp > 0) {
    metrics.precision = static_cast<double>(counts.tp) /
                        static_cast<double>(counts.tp + counts.fp);
  }
  if (counts.tp + counts.fn > 0) {
    metrics.recall = static_cast<double>(counts.tp) /
                     static_cast<double>(counts.tp + counts.fn);
    metrics.fnr = 1.0 - *metrics.recall;
  }
  if (counts.tn + counts.fp > 0) {
    metrics.tnr = static_cast<double>(counts.tn) /
                  static_cast<double>(counts.tn + counts.fp);
    metrics.fpr = 1.0 - *metrics.tnr;
  }
  return metrics;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DegenerateInput("correlation inputs differ in length");
  }
  if (x.size() < 2) {
    throw DegenerateInput("correlation needs at least two points");
  }
  double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DegenerateInput("correlation undefined for constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::string collapse_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out += ' ';
    in_space = false;
    out += c;
  }
  return out;
}

}  // namespace

std::vector<MathQuery> dedup_queries(const std::vector<MathQuery>& queries) {
  std::vector<MathQuery> out;
  std::set<std::string> seen;
  for (const auto& query : queries) {
    if (seen.insert(collapse_whitespace(query.text)).second) {
      out.push_back(query);
    }
  }
  return out;
}

DecontaminationResult decontaminate(const std::vector<MathQuery>& train,
                                    const std::vector<MathQuery>& bench,
                                    backends::EmbeddingClient& provider,
                                    double threshold, int workers) {
  DecontaminationResult result;
  if (train.empty()) return result;
  if (bench.empty()) {
    result.kept = train;
    return result;
  }
  auto embed_corpus = [&provider](const std::vector<MathQuery>& queries,
                                  const char* label) {
    std::vector<std::string> texts;
    texts.reserve(queries.size());
    for (const auto& q : queries) texts.push_back(q.text);
    std::vector<std::vector<float>> vectors;
    try {
      vectors = provider.embed(texts);
    } catch (const BackendFault& fault) {
      throw BackendFault(FaultKind::provider_failure,
                         std::string("embedding ") + label + " '" +
                             queries.front().id + "'...: " + fault.what());
    }
    if (vectors.size() != queries.size()) {
      throw BackendFault(FaultKind::provider_failure,
                         std::string("embedding provider returned ") +
                             std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(queries.size()) + " " + label +
                             " items");
    }
    kernels::EmbeddingMatrix matrix;
    for (const auto& vec : vectors) {
      matrix.append(std::span<const float>(vec.data(), vec.size()));
    }
    return matrix;
  };

  auto train_matrix = embed_corpus(train, "training item");
  auto bench_matrix = embed_corpus(bench, "benchmark item");
  auto similarity = kernels::max_cosine(train_matrix, bench_matrix, workers);
  for (size_t i = 0; i < train.size(); ++i) {
    if (similarity[i] > threshold) {
      result.removed.push_back(train[i]);
    } else {
      result.kept.push_back(train[i]);
    }
  }
  return result;
}

ToolUsageStats tool_usage_stats(const std::vector<Trajectory>& trajectories) {
  ToolUsageStats stats;
  stats.trajectory_count = trajectories.size();
  if (trajectories.empty()) return stats;

  long total_calls = 0;
  long syntax_total = 0, syntax_passes = 0;
  long consistency_total = 0, consistency_passes = 0;
  std::map<int, std::pair<long, long>> by_attempt;  // attempt -> {pass, total}

  for (const auto& trajectory : trajectories) {
    total_calls += count_tool_calls(trajectory);
    int version = -1;
    for (const auto& step : trajectory.steps) {
      if (step.kind == StepKind::model_turn && step.statement_version) {
        version = *step.statement_version;
      }
      if (step.kind != StepKind::tool_result || !step.result) continue;
      if (step.result->syntax) {
        ++syntax_total;
        if (step.result->syntax->pass) ++syntax_passes;
      }
      if (step.result->consistency) {
        ++consistency_total;
        bool pass = step.result->consistency->pass;
        auto& bucket = by_attempt[std::max(version, 0)];
        if (pass) {
          ++consistency_passes;
          ++bucket.first;
        }
        ++bucket.second;
      }
    }
  }

  stats.avg_tool_calls = static_cast<double>(total_calls) /
                         static_cast<double>(trajectories.size());
  if (syntax_total > 0) {
    stats.syntax_success_rate =
        static_cast<double>(syntax_passes) / static_cast<double>(syntax_total);
  }
  if (consistency_total > 0) {
    stats.consistency_success_rate = static_cast<double>(consistency_passes) /
                                     static_cast<double>(consistency_total);
  }
  for (const auto& [attempt, counts] : by_attempt) {
    stats.consistency_success_by_attempt[attempt] =
        static_cast<double>(counts.first) /
        static_cast<double>(counts.second);
  }
  return stats;
}

namespace {

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

double dpo_nll_loss(double chosen_logratio, double rejected_logratio,
                    double chosen_policy_logp, double beta, double alpha) {
  if (beta <= 0.0) throw DomainError("beta must be positive");
  if (alpha < 0.0) throw DomainError("alpha must be non-negative");
  double margin = beta * (chosen_logratio - rejected_logratio);
  return softplus(-margin) - alpha * chosen_policy_logp;
}

}  // namespace atf::eval
