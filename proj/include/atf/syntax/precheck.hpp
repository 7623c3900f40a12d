#pragma once

#include <string>
#include <vector>

#include "atf/types.hpp"

namespace atf::syntax {

enum class PrecheckFailure {
  missing_required_import,
  missing_terminal_sorry,
  unmatched_brackets,
};

const char* to_string(PrecheckFailure failure);

struct PrecheckResult {
  std::vector<PrecheckFailure> failures;

  bool pass() const { return failures.empty(); }
};

struct PrecheckOptions {
  std::string open_brackets = "([{";
  std::string close_brackets = ")]}";
  // Anonymous-constructor brackets are legal in unbalanced-looking spots, so
  // they stay out of the scan unless asked for.
  bool match_angle_brackets = false;
};

// Static filters applied before any compiler dispatch. Bracket scanning
// skips string literals, line comments and nested block comments.
PrecheckResult precheck(const FormalStatement& statement,
                        const PrecheckOptions& options = {});

}  // namespace atf::syntax
