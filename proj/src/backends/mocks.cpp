#include "atf/backends/mocks.hpp"

#include <cmath>

#include "atf/hash.hpp"

namespace atf::backends {

bool RequestMatch::matches(const std::string& request) const {
  switch (kind) {
    case Kind::any: return true;
    case Kind::contains: return request.find(value) != std::string::npos;
    case Kind::equals: return request == value;
  }
  return false;
}

std::vector<Diagnostic> ScriptedLeanClient::execute(const std::string& code,
                                                    double /*timeout_s*/) {
  std::lock_guard<std::mutex> lock(mu_);
  ++calls_;
  for (size_t i = 0; i < script_.size(); ++i) {
    if (consumed_[i] || !script_[i].match.matches(code)) continue;
    consumed_[i] = true;
    if (script_[i].fault) {
      throw BackendFault(*script_[i].fault,
                         script_[i].fault_message.empty()
                             ? "scripted compiler fault"
                             : script_[i].fault_message);
    }
    return script_[i].diagnostics;
  }
  throw ScriptMismatch("compiler script has no entry for request: " +
                       code.substr(0, 120));
}

size_t ScriptedLeanClient::remaining() const {
  std::lock_guard<std::mutex> lock(mu_);
  size_t n = 0;
  for (bool c : consumed_) {
    if (!c) ++n;
  }
  return n;
}

size_t ScriptedLeanClient::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

std::string ScriptedChatClient::chat(const std::vector<Message>& messages,
                                     const ChatParams& /*params*/) {
  std::string last = messages.empty() ? std::string() : messages.back().content;
  std::lock_guard<std::mutex> lock(mu_);
  ++calls_;
  for (size_t i = 0; i < script_.size(); ++i) {
    if (consumed_[i] || !script_[i].match.matches(last)) continue;
    consumed_[i] = true;
    if (script_[i].fault) {
      throw BackendFault(*script_[i].fault, script_[i].fault_message.empty()
                                                ? "scripted chat fault"
                                                : script_[i].fault_message);
    }
    return script_[i].response;
  }
  throw ScriptMismatch("chat script has no entry for request: " +
                       last.substr(0, 120));
}

size_t ScriptedChatClient::remaining() const {
  std::lock_guard<std::mutex> lock(mu_);
  size_t n = 0;
  for (bool c : consumed_) {
    if (!c) ++n;
  }
  return n;
}

size_t ScriptedChatClient::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

std::vector<float> HashEmbeddingClient::embed_one(
    const std::string& text) const {
  std::vector<float> vec(dim_, 0.0f);
  if (text.size() >= ngram_) {
    for (size_t i = 0; i + ngram_ <= text.size(); ++i) {
      uint64_t h = fnv1a64(std::string_view(text).substr(i, ngram_));
      vec[h % dim_] += 1.0f;
    }
  } else if (!text.empty()) {
    vec[fnv1a64(text) % dim_] += 1.0f;
  }
  double norm = 0.0;
  for (float v : vec) norm += static_cast<double>(v) * v;
  if (norm > 0.0) {
    float inv = static_cast<float>(1.0 / std::sqrt(norm));
    for (float& v : vec) v *= inv;
  }
  return vec;
}

std::vector<std::vector<float>> HashEmbeddingClient::embed(
    const std::vector<std::string>& texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_one(t));
  return out;
}

std::vector<std::vector<float>> TableEmbeddingClient::embed(
    const std::vector<std::string>& texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = table_.find(t);
    if (it == table_.end()) {
      throw ScriptMismatch("embedding table has no entry for: " +
                           t.substr(0, 120));
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace atf::backends
