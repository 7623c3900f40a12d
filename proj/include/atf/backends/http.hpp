#pragma once

#include <functional>

#include "atf/backends/clients.hpp"

namespace atf::backends {

// Injectable pause between retries; tests swap in a no-op.
using Sleeper = std::function<void(double seconds)>;

Sleeper default_sleeper();

// POST {base_url}/verify with {"code", "timeout_s"}; expects
// {"diagnostics": [...]} in compiler wire format.
class HttpLeanClient : public LeanClient {
 public:
  explicit HttpLeanClient(EndpointConfig config,
                          Sleeper sleeper = default_sleeper())
      : config_(std::move(config)), sleeper_(std::move(sleeper)) {}

  std::vector<Diagnostic> execute(const std::string& code,
                                  double timeout_s) override;

 private:
  EndpointConfig config_;
  Sleeper sleeper_;
};

// POST {base_url}/v1/chat/completions, OpenAI-compatible shape.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(EndpointConfig config,
                          Sleeper sleeper = default_sleeper())
      : config_(std::move(config)), sleeper_(std::move(sleeper)) {}

  std::string chat(const std::vector<Message>& messages,
                   const ChatParams& params) override;

 private:
  EndpointConfig config_;
  Sleeper sleeper_;
};

// POST {base_url}/v1/embeddings, OpenAI-compatible shape.
class HttpEmbeddingClient : public EmbeddingClient {
 public:
  explicit HttpEmbeddingClient(EndpointConfig config,
                               Sleeper sleeper = default_sleeper())
      : config_(std::move(config)), sleeper_(std::move(sleeper)) {}

  std::vector<std::vector<float>> embed(
      const std::vector<std::string>& texts) override;

 private:
  EndpointConfig config_;
  Sleeper sleeper_;
};

}  // namespace atf::backends
