#include "atf/syntax/batch.hpp"

#include <algorithm>
#include <sstream>

#include "atf/errors.hpp"
#include "atf/hash.hpp"

namespace atf::syntax {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t pos = 0;
  while (true) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

bool is_import_line(const std::string& line) {
  size_t begin = line.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return false;
  return line.compare(begin, 7, "import ") == 0 ||
         line.compare(begin, line.size() - begin, "import") == 0;
}

}  // namespace

std::vector<std::string> import_key_for(const FormalStatement& statement) {
  auto names = extract_imports(statement.code);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

std::vector<StatementGroup> group_statements(
    const std::vector<std::pair<size_t, FormalStatement>>& statements,
    int batch_size) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  std::vector<StatementGroup> groups;
  // key -> index of the group currently accepting members for that key
  std::map<std::vector<std::string>, size_t> open_group;
  for (const auto& [index, statement] : statements) {
    auto key = import_key_for(statement);
    auto it = open_group.find(key);
    if (it == open_group.end() ||
        groups[it->second].members.size() >=
            static_cast<size_t>(batch_size)) {
      groups.push_back(StatementGroup{key, {}});
      open_group[key] = groups.size() - 1;
      it = open_group.find(key);
    }
    groups[it->second].members.emplace_back(index, statement);
  }
  return groups;
}

std::vector<StatementGroup> group_statements(
    const std::vector<FormalStatement>& statements, int batch_size) {
  std::vector<std::pair<size_t, FormalStatement>> indexed;
  indexed.reserve(statements.size());
  for (size_t i = 0; i < statements.size(); ++i) {
    indexed.emplace_back(i, statements[i]);
  }
  return group_statements(indexed, batch_size);
}

std::string group_nonce(const StatementGroup& group) {
  uint64_t h = kFnvOffset;
  for (const auto& name : group.import_key) {
    h = fnv1a64(name, h);
    h = fnv1a64("\x1f", h);
  }
  for (const auto& [index, statement] : group.members) {
    h = fnv1a64(statement.code, h);
    h = fnv1a64("\x1e", h);
  }
  return to_hex(h).substr(8);
}

AssembledFile assemble_group(const StatementGroup& group, size_t group_id,
                             const std::string& nonce) {
  if (group.members.empty()) {
    throw DomainError("cannot assemble an empty group");
  }
  AssembledFile file;
  file.nonce = nonce.empty() ? group_nonce(group) : nonce;

  // Header order follows the first member's code; key order is the fallback
  // for required imports the text never spells out.
  std::vector<std::string> header_imports =
      extract_imports(group.members.front().second.code);
  for (const auto& name : group.import_key) {
    if (std::find(header_imports.begin(), header_imports.end(), name) ==
        header_imports.end()) {
      header_imports.push_back(name);
    }
  }

  std::ostringstream source;
  int line = 0;
  for (const auto& name : header_imports) {
    source << "import " << name << "\n";
    ++line;
  }
  file.header_lines = line;

  for (size_t m = 0; m < group.members.size(); ++m) {
    const auto& [index, statement] = group.members[m];
    std::string ns = "ATF_batch_" + file.nonce + "_" +
                     std::to_string(group_id) + "_" + std::to_string(m);
    LineRange range;
    range.statement_index = index;
    range.first_line = line + 1;

    source << "namespace " << ns << "\n";
    ++line;
    std::vector<int> body_lines;
    auto original = split_lines(statement.code);
    for (size_t li = 0; li < original.size(); ++li) {
      if (is_import_line(original[li])) continue;
      source << original[li] << "\n";
      ++line;
      body_lines.push_back(static_cast<int>(li) + 1);
    }
    source << "end " << ns << "\n";
    ++line;

    range.last_line = line;
    file.line_map.push_back(range);
    file.body_source_lines.push_back(std::move(body_lines));
  }
  file.source = source.str();
  return file;
}

std::map<size_t, std::vector<Diagnostic>> map_diagnostics(
    const std::vector<Diagnostic>& file_diags, const AssembledFile& file) {
  std::map<size_t, std::vector<Diagnostic>> out;
  for (const auto& range : file.line_map) {
    out[range.statement_index];  // every member gets a list
  }
  for (const auto& diag : file_diags) {
    if (diag.start_line <= file.header_lines) {
      for (const auto& range : file.line_map) {
        Diagnostic local = diag;
        local.start_line = 1;
        local.end_line = 1;
        out[range.statement_index].push_back(local);
      }
      continue;
    }
    const LineRange* owner = nullptr;
    for (const auto& range : file.line_map) {
      if (diag.start_line >= range.first_line &&
          diag.start_line <= range.last_line) {
        owner = &range;
        break;
      }
    }
    if (owner == nullptr) {
      throw UnmappableDiagnostic(
          "diagnostic at line " + std::to_string(diag.start_line) +
          " lies beyond the last member range");
    }
    Diagnostic local = diag;
    local.start_line = diag.start_line - (owner->first_line - 1);
    int end_line = std::min(diag.end_line, owner->last_line);
    local.end_line =
        std::max(local.start_line, end_line - (owner->first_line - 1));
    out[owner->statement_index].push_back(local);
  }
  return out;
}

Diagnostic to_statement_coordinates(const Diagnostic& local,
                                    const std::vector<int>& body_lines) {
  auto translate = [&](int line) {
    if (line <= 1 || body_lines.empty()) return 1;
    size_t body_index = static_cast<size_t>(line) - 2;
    if (body_index >= body_lines.size()) return body_lines.back();
    return body_lines[body_index];
  };
  Diagnostic out = local;
  out.start_line = translate(local.start_line);
  out.end_line = std::max(out.start_line, translate(local.end_line));
  return out;
}

}  // namespace atf::syntax
