#include "atf/syntax/precheck.hpp"

#include <algorithm>
#include <cctype>

namespace atf::syntax {

namespace {

bool has_required_imports(const FormalStatement& statement) {
  auto present = extract_imports(statement.code);
  for (const auto& required : statement.required_imports) {
    if (std::find(present.begin(), present.end(), required) == present.end()) {
      return false;
    }
  }
  return true;
}

bool ends_with_by_sorry(const std::string& code) {
  size_t end = code.find_last_not_of(" \t\r\n");
  if (end == std::string::npos) return false;
  size_t sorry_start = end >= 4 ? end - 4 : std::string::npos;
  if (sorry_start == std::string::npos ||
      code.compare(sorry_start, 5, "sorry") != 0) {
    return false;
  }
  if (sorry_start == 0) return false;
  // "sorry" must be its own token, not the tail of an identifier.
  if (std::isspace(static_cast<unsigned char>(code[sorry_start - 1])) == 0) {
    return false;
  }
  size_t before = code.find_last_not_of(" \t\r\n", sorry_start - 1);
  if (before == std::string::npos || before < 1) return false;
  if (code.compare(before - 1, 2, "by") != 0) return false;
  // "by" must be its own token
  if (before >= 2) {
    char prev = code[before - 2];
    if (std::isalnum(static_cast<unsigned char>(prev)) || prev == '_') {
      return false;
    }
  }
  return true;
}

// U+27E8 / U+27E9 as UTF-8
constexpr const char* kAngleOpen = "\xe2\x9f\xa8";
constexpr const char* kAngleClose = "\xe2\x9f\xa9";

bool brackets_balanced(const std::string& code,
                       const PrecheckOptions& options) {
  std::vector<char> stack;  // close bracket expected for each open
  size_t i = 0;
  const size_t n = code.size();
  while (i < n) {
    char c = code[i];
    if (c == '-' && i + 1 < n && code[i + 1] == '-') {
      // line comment
      while (i < n && code[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && code[i + 1] == '-') {
      // nested block comment
      int depth = 1;
      i += 2;
      while (i < n && depth > 0) {
        if (code[i] == '/' && i + 1 < n && code[i + 1] == '-') {
          ++depth;
          i += 2;
        } else if (code[i] == '-' && i + 1 < n && code[i + 1] == '/') {
          --depth;
          i += 2;
        } else {
          ++i;
        }
      }
      continue;
    }
    if (c == '"') {
      ++i;
      while (i < n) {
        if (code[i] == '\\' && i + 1 < n) {
          i += 2;
          continue;
        }
        if (code[i] == '"') {
          ++i;
          break;
        }
        ++i;
      }
      continue;
    }
    if (options.match_angle_brackets) {
      if (code.compare(i, 3, kAngleOpen) == 0) {
        stack.push_back('A');
        i += 3;
        continue;
      }
      if (code.compare(i, 3, kAngleClose) == 0) {
        if (stack.empty() || stack.back() != 'A') return false;
        stack.pop_back();
        i += 3;
        continue;
      }
    }
    size_t open_pos = options.open_brackets.find(c);
    if (open_pos != std::string::npos) {
      stack.push_back(options.close_brackets[open_pos]);
      ++i;
      continue;
    }
    if (options.close_brackets.find(c) != std::string::npos) {
      if (stack.empty() || stack.back() != c) return false;
      stack.pop_back();
      ++i;
      continue;
    }
    ++i;
  }
  return stack.empty();
}

}  // namespace

const char* to_string(PrecheckFailure failure) {
  switch (failure) {
    case PrecheckFailure::missing_required_import:
      return "missing_required_import";
    case PrecheckFailure::missing_terminal_sorry:
      return "missing_terminal_sorry";
    case PrecheckFailure::unmatched_brackets:
      return "unmatched_brackets";
  }
  return "unmatched_brackets";
}

PrecheckResult precheck(const FormalStatement& statement,
                        const PrecheckOptions& options) {
  PrecheckResult result;
  if (!has_required_imports(statement)) {
    result.failures.push_back(PrecheckFailure::missing_required_import);
  }
  if (!ends_with_by_sorry(statement.code)) {
    result.failures.push_back(PrecheckFailure::missing_terminal_sorry);
  }
  if (!brackets_balanced(statement.code, options)) {
    result.failures.push_back(PrecheckFailure::unmatched_brackets);
  }
  return result;
}

}  // namespace atf::syntax
