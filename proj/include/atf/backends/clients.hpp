#pragma once

#include <memory>
#include <string>
#include <vector>

#include "atf/types.hpp"

namespace atf::backends {

struct EndpointConfig {
  std::string base_url;
  std::string model_name;
  double timeout_s = 60.0;
  int max_retries = 2;
  std::string auth_env;  // env var holding the bearer token, may be empty
};

struct Message {
  std::string role;  // system | user | assistant | tool
  std::string content;
};

struct ChatParams {
  double temperature = 0.6;
  int max_tokens = 16384;
};

// Compiler pool. Throws BackendFault on infrastructure failures; compiler
// diagnostics are data, not faults.
class LeanClient {
 public:
  virtual ~LeanClient() = default;
  virtual std::vector<Diagnostic> execute(const std::string& code,
                                          double timeout_s) = 0;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string chat(const std::vector<Message>& messages,
                           const ChatParams& params) = 0;
};

class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  virtual std::vector<std::vector<float>> embed(
      const std::vector<std::string>& texts) = 0;
};

}  // namespace atf::backends
