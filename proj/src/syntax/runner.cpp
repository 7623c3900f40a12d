#include "atf/syntax/runner.hpp"

#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "atf/errors.hpp"
#include "atf/syntax/batch.hpp"

namespace atf::syntax {

namespace {

Diagnostic synthetic_error(const std::string& message) {
  Diagnostic d;
  d.severity = Severity::error;
  d.start_line = 1;
  d.start_col = 0;
  d.end_line = 1;
  d.end_col = 0;
  d.message = message;
  return d;
}

SyntaxReport precheck_report(const PrecheckResult& result) {
  SyntaxReport report;
  report.pass = false;
  report.stage = SyntaxStage::precheck;
  for (auto failure : result.failures) {
    report.errors.push_back(
        synthetic_error(std::string("pre-check failed: ") +
                        to_string(failure)));
  }
  return report;
}

void run_group(const StatementGroup& group, size_t group_id,
               backends::LeanClient& client, const RunConfig& config,
               const SyntaxRunOptions& options, RunCounters* counters,
               std::vector<SyntaxReport>& reports) {
  auto assembled = assemble_group(group, group_id, options.nonce);
  if (counters) counters->groups_compiled.fetch_add(1);
  try {
    auto diags = client.execute(assembled.source, config.compile_timeout_s);
    auto per_member = map_diagnostics(diags, assembled);
    for (size_t m = 0; m < group.members.size(); ++m) {
      size_t index = group.members[m].first;
      SyntaxReport report;
      report.stage = SyntaxStage::batch;
      for (const auto& local : per_member[index]) {
        report.errors.push_back(
            to_statement_coordinates(local, assembled.body_source_lines[m]));
      }
      report.pass = diagnostics_pass(report.errors);
      reports[index] = std::move(report);
    }
    return;
  } catch (const BackendFault&) {
    // fall through to individual execution
  } catch (const UnmappableDiagnostic&) {
    // treat a wrongly shaped batch result the same way
  }

  if (counters) counters->fallback_groups.fetch_add(1);
  for (const auto& [index, statement] : group.members) {
    if (counters) counters->individual_calls.fetch_add(1);
    SyntaxReport report;
    report.stage = SyntaxStage::individual_fallback;
    try {
      report.errors = client.execute(statement.code, config.compile_timeout_s);
      report.pass = diagnostics_pass(report.errors);
    } catch (const BackendFault& fault) {
      report.pass = false;
      report.fault = std::string(to_string(fault.kind())) + ": " +
                     fault.what();
      report.errors.push_back(
          synthetic_error("compiler backend unavailable: " +
                          std::string(fault.what())));
    }
    reports[index] = std::move(report);
  }
}

}  // namespace

std::vector<SyntaxReport> run_syntax_check(
    const std::vector<FormalStatement>& statements,
    backends::LeanClient& client, const RunConfig& config,
    const SyntaxRunOptions& options, RunCounters* counters) {
  std::vector<SyntaxReport> reports(statements.size());

  std::vector<std::pair<size_t, FormalStatement>> survivors;
  for (size_t i = 0; i < statements.size(); ++i) {
    auto result = precheck(statements[i], options.precheck);
    if (result.pass()) {
      survivors.emplace_back(i, statements[i]);
    } else {
      if (counters) counters->precheck_rejects.fetch_add(1);
      reports[i] = precheck_report(result);
    }
  }

  auto groups = group_statements(survivors, config.batch_size);
  const int64_t n = static_cast<int64_t>(groups.size());
#ifdef _OPENMP
  if (options.workers > 1) omp_set_num_threads(options.workers);
#pragma omp parallel for schedule(dynamic) if (options.workers != 1 && n > 1)
#endif
  for (int64_t g = 0; g < n; ++g) {
    run_group(groups[static_cast<size_t>(g)], static_cast<size_t>(g), client,
              config, options, counters, reports);
  }
  return reports;
}

SyntaxReport check_statement(const FormalStatement& statement,
                             backends::LeanClient& client,
                             const RunConfig& config,
                             const SyntaxRunOptions& options,
                             RunCounters* counters) {
  auto reports =
      run_syntax_check({statement}, client, config, options, counters);
  return reports.front();
}

}  // namespace atf::syntax
