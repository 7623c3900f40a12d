#include "atf/backends/http.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "atf/errors.hpp"

namespace atf::backends {

namespace {

using nlohmann::json;

Sleeper g_default_sleeper = [](double seconds) {
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
};

httplib::Headers auth_headers(const EndpointConfig& config) {
  httplib::Headers headers;
  if (!config.auth_env.empty()) {
    const char* token = std::getenv(config.auth_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw ConfigError("credential env var is unset: " + config.auth_env);
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  return headers;
}

BackendFault fault_from_transport(const httplib::Result& res) {
  using Err = httplib::Error;
  switch (res.error()) {
    case Err::ConnectionTimeout:
    case Err::Read:
    case Err::Write:
      return BackendFault(FaultKind::timeout, "request timed out");
    default:
      return BackendFault(FaultKind::transport,
                          "transport error: " + httplib::to_string(res.error()));
  }
}

BackendFault fault_from_status(int status, const std::string& body) {
  std::string detail =
      "HTTP " + std::to_string(status) + ": " + body.substr(0, 200);
  if (status == 429) return BackendFault(FaultKind::rate_limited, detail);
  if (status >= 500) return BackendFault(FaultKind::server_error, detail);
  return BackendFault(FaultKind::provider_failure, detail);
}

// POSTs JSON with bounded retries on retryable faults.
json post_json(const EndpointConfig& config, const std::string& path,
               const json& body, double timeout_s, const Sleeper& sleeper) {
  std::string payload = body.dump();
  BackendFault last(FaultKind::transport, "no attempt made");
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) sleeper(0.25 * attempt);
    try {
      httplib::Client client(config.base_url);
      auto connect_s = std::max(1, static_cast<int>(timeout_s));
      client.set_connection_timeout(connect_s, 0);
      client.set_read_timeout(connect_s, 0);
      client.set_write_timeout(connect_s, 0);
      auto res = client.Post(path, auth_headers(config), payload,
                             "application/json");
      if (!res) throw fault_from_transport(res);
      if (res->status != 200) throw fault_from_status(res->status, res->body);
      return json::parse(res->body);
    } catch (const BackendFault& fault) {
      if (!fault.retryable() || attempt == config.max_retries) throw;
      last = fault;
    } catch (const json::parse_error& e) {
      throw BackendFault(FaultKind::provider_failure,
                         std::string("unparseable response body: ") + e.what());
    }
  }
  throw last;
}

}  // namespace

Sleeper default_sleeper() { return g_default_sleeper; }

std::vector<Diagnostic> HttpLeanClient::execute(const std::string& code,
                                                double timeout_s) {
  json body{{"code", code}, {"timeout_s", timeout_s}};
  json res = post_json(config_, "/verify", body, timeout_s, sleeper_);
  if (!res.contains("diagnostics") || !res["diagnostics"].is_array()) {
    throw BackendFault(FaultKind::provider_failure,
                       "compiler response missing diagnostics array");
  }
  std::vector<Diagnostic> diags;
  for (const auto& d : res["diagnostics"]) {
    Diagnostic diag;
    diag.severity = severity_from_string(d.value("severity", "error"));
    if (d.contains("pos")) {
      diag.start_line = d["pos"].value("line", 1);
      diag.start_col = d["pos"].value("column", 0);
    }
    if (d.contains("endPos") && !d["endPos"].is_null()) {
      diag.end_line = d["endPos"].value("line", diag.start_line);
      diag.end_col = d["endPos"].value("column", diag.start_col);
    } else {
      diag.end_line = diag.start_line;
      diag.end_col = diag.start_col;
    }
    diag.message = d.value("data", "");
    diags.push_back(std::move(diag));
  }
  return diags;
}

std::string HttpChatClient::chat(const std::vector<Message>& messages,
                                 const ChatParams& params) {
  json body{{"model", config_.model_name},
            {"messages", json::array()},
            {"temperature", params.temperature},
            {"max_tokens", params.max_tokens}};
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  json res =
      post_json(config_, "/v1/chat/completions", body, config_.timeout_s,
                sleeper_);
  try {
    return res.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const json::exception&) {
    throw BackendFault(FaultKind::provider_failure,
                       "chat response missing choices[0].message.content");
  }
}

std::vector<std::vector<float>> HttpEmbeddingClient::embed(
    const std::vector<std::string>& texts) {
  json body{{"model", config_.model_name}, {"input", texts}};
  json res = post_json(config_, "/v1/embeddings", body, config_.timeout_s,
                       sleeper_);
  try {
    std::vector<std::vector<float>> out(texts.size());
    for (const auto& row : res.at("data")) {
      size_t index = row.at("index").get<size_t>();
      if (index >= out.size()) {
        throw BackendFault(FaultKind::provider_failure,
                           "embedding index out of range");
      }
      out[index] = row.at("embedding").get<std::vector<float>>();
    }
    return out;
  } catch (const json::exception&) {
    throw BackendFault(FaultKind::provider_failure,
                       "embedding response missing data[].embedding");
  }
}

}  // namespace atf::backends
