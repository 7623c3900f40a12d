#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "atf/backends/clients.hpp"
#include "atf/errors.hpp"

namespace atf::backends {

// Matching rule for scripted entries.
struct RequestMatch {
  enum class Kind { any, contains, equals };
  Kind kind = Kind::any;
  std::string value;

  bool matches(const std::string& request) const;

  static RequestMatch any() { return {}; }
  static RequestMatch contains(std::string needle) {
    return {Kind::contains, std::move(needle)};
  }
  static RequestMatch equals(std::string text) {
    return {Kind::equals, std::move(text)};
  }
};

struct LeanScriptEntry {
  RequestMatch match;
  std::vector<Diagnostic> diagnostics;
  std::optional<FaultKind> fault;
  std::string fault_message;
};

// Replays scripted compiler responses. Each request consumes the first
// unconsumed entry whose match accepts it; no match throws ScriptMismatch.
// Thread safe.
class ScriptedLeanClient : public LeanClient {
 public:
  explicit ScriptedLeanClient(std::vector<LeanScriptEntry> script)
      : script_(std::move(script)) {}

  std::vector<Diagnostic> execute(const std::string& code,
                                  double timeout_s) override;

  size_t remaining() const;
  size_t calls() const;

 private:
  std::vector<LeanScriptEntry> script_;
  std::vector<bool> consumed_ = std::vector<bool>(script_.size(), false);
  size_t calls_ = 0;
  mutable std::mutex mu_;
};

struct ChatScriptEntry {
  RequestMatch match;  // applied to the last message content
  std::string response;
  std::optional<FaultKind> fault;
  std::string fault_message;
};

class ScriptedChatClient : public ChatClient {
 public:
  explicit ScriptedChatClient(std::vector<ChatScriptEntry> script)
      : script_(std::move(script)) {}

  std::string chat(const std::vector<Message>& messages,
                   const ChatParams& params) override;

  size_t remaining() const;
  size_t calls() const;

 private:
  std::vector<ChatScriptEntry> script_;
  std::vector<bool> consumed_ = std::vector<bool>(script_.size(), false);
  size_t calls_ = 0;
  mutable std::mutex mu_;
};

// Deterministic local embedding: hashed character n-grams, L2 normalized.
class HashEmbeddingClient : public EmbeddingClient {
 public:
  explicit HashEmbeddingClient(size_t dim = 256, size_t ngram = 3)
      : dim_(dim), ngram_(ngram) {}

  std::vector<std::vector<float>> embed(
      const std::vector<std::string>& texts) override;

  std::vector<float> embed_one(const std::string& text) const;

 private:
  size_t dim_;
  size_t ngram_;
};

// Fixed text -> vector table; unknown texts throw ScriptMismatch.
class TableEmbeddingClient : public EmbeddingClient {
 public:
  explicit TableEmbeddingClient(
      std::map<std::string, std::vector<float>> table)
      : table_(std::move(table)) {}

  std::vector<std::vector<float>> embed(
      const std::vector<std::string>& texts) override;

 private:
  std::map<std::string, std::vector<float>> table_;
};

}  // namespace atf::backends
