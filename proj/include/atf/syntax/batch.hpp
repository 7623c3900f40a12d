#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "atf/types.hpp"

namespace atf::syntax {

// Statements sharing a canonical import set, compiled together.
struct StatementGroup {
  std::vector<std::string> import_key;  // sorted unique import names
  std::vector<std::pair<size_t, FormalStatement>> members;
};

// Canonical key: sorted unique imports of the statement's code.
std::vector<std::string> import_key_for(const FormalStatement& statement);

std::vector<StatementGroup> group_statements(
    const std::vector<std::pair<size_t, FormalStatement>>& statements,
    int batch_size);
std::vector<StatementGroup> group_statements(
    const std::vector<FormalStatement>& statements, int batch_size);

struct LineRange {
  size_t statement_index;
  int first_line;  // namespace open, 1-based in the assembled source
  int last_line;   // namespace close
};

struct AssembledFile {
  std::string source;
  std::vector<LineRange> line_map;
  int header_lines = 0;
  std::string nonce;
  // For each member, the original statement line number of every body line.
  std::vector<std::vector<int>> body_source_lines;
};

// Deterministic default nonce derived from the group's content.
std::string group_nonce(const StatementGroup& group);

// Shared import header, then one namespace block per member with the
// member's own import lines removed. No filler lines: every line past the
// header belongs to exactly one member range.
AssembledFile assemble_group(const StatementGroup& group, size_t group_id,
                             const std::string& nonce = "");

// Reassigns file diagnostics to members. Lines inside a member range become
// member-local (namespace open = line 1); header lines are broadcast to every
// member as line 1. Throws UnmappableDiagnostic for lines past the last range.
std::map<size_t, std::vector<Diagnostic>> map_diagnostics(
    const std::vector<Diagnostic>& file_diags, const AssembledFile& file);

// Translates a member-local diagnostic back to original statement
// coordinates using the recorded body line numbers.
Diagnostic to_statement_coordinates(const Diagnostic& local,
                                    const std::vector<int>& body_lines);

}  // namespace atf::syntax
