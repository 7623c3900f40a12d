#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "atf/backends/clients.hpp"
#include "atf/syntax/precheck.hpp"
#include "atf/types.hpp"

namespace atf::syntax {

struct RunCounters {
  std::atomic<long> groups_compiled{0};
  std::atomic<long> fallback_groups{0};
  std::atomic<long> individual_calls{0};
  std::atomic<long> precheck_rejects{0};
};

struct SyntaxRunOptions {
  std::string nonce;  // empty: derived from group content
  int workers = 0;    // 0: library default
  PrecheckOptions precheck;
};

// Full tool pass: precheck gate, import grouping, batch execution, and
// per-member fallback to individual calls when a batch fails. Reports come
// back in statement order with diagnostics in original coordinates.
std::vector<SyntaxReport> run_syntax_check(
    const std::vector<FormalStatement>& statements,
    backends::LeanClient& client, const RunConfig& config,
    const SyntaxRunOptions& options = {}, RunCounters* counters = nullptr);

// Convenience wrapper for a single statement.
SyntaxReport check_statement(const FormalStatement& statement,
                             backends::LeanClient& client,
                             const RunConfig& config,
                             const SyntaxRunOptions& options = {},
                             RunCounters* counters = nullptr);

}  // namespace atf::syntax
