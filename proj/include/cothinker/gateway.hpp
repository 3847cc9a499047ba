#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cothinker/common.hpp"
#include "cothinker/config.hpp"

namespace cothinker {

enum class RequestTag { Orchestrate, InitialGen, Refine, TmsUpdate, Synthesize, Baseline };

inline std::string to_string(RequestTag t) {
  switch (t) {
    case RequestTag::Orchestrate: return "Orchestrate";
    case RequestTag::InitialGen: return "InitialGen";
    case RequestTag::Refine: return "Refine";
    case RequestTag::TmsUpdate: return "TmsUpdate";
    case RequestTag::Synthesize: return "Synthesize";
    case RequestTag::Baseline: return "Baseline";
  }
  return "?";
}

struct ChatRequest {
  std::optional<std::string> system_text;
  std::string user_text;
  double temperature = 0.0;
  double frequency_penalty = 0.0;
  int max_tokens = 2048;
  RequestTag tag = RequestTag::Baseline;
};

struct Completion {
  std::string text;
  std::string backend_id;
  std::chrono::milliseconds latency{0};
  int retry_count = 0;
};

// Hashing basis for the mock backend: tag, system, user, decimal temperature,
// decimal penalty, joined by 0x1F.
inline std::string canonical_request_bytes(const ChatRequest& req) {
  std::string out = to_string(req.tag);
  out.push_back('\x1f');
  out += req.system_text.value_or("");
  out.push_back('\x1f');
  out += req.user_text;
  out.push_back('\x1f');
  out += fmt_decimal(req.temperature);
  out.push_back('\x1f');
  out += fmt_decimal(req.frequency_penalty);
  return out;
}

namespace mock_text {
inline constexpr const char* kTmsHeaderExpertise = "EXPERTISE DIRECTORY:";
inline constexpr const char* kTmsHeaderKnowledge = "SHARED KNOWLEDGE:";
inline constexpr const char* kTmsHeaderIssues = "UNRESOLVED ISSUES:";
}  // namespace mock_text

// Pure function of (canonical request bytes, seed). Each template embeds the
// 16-hex FNV-1a-64 digest of the canonical bytes, so distinct requests yield
// distinct texts; a seed-mixed token makes different seeds distinguishable too.
inline Completion mock_complete(const ChatRequest& req, std::uint64_t seed) {
  if (trim(req.user_text).empty())
    throw Error(Errc::EmptyText, "chat request user_text must be non-empty");
  const std::string canon = canonical_request_bytes(req);
  const std::uint64_t digest = fnv1a64(canon);
  const std::string d = to_hex16(digest);
  const std::string s = to_hex16(Rng(seed ^ digest).next());

  std::string text;
  switch (req.tag) {
    case RequestTag::Orchestrate:
      text = "Approach the task with an adapted perspective, emphasizing angle " + d +
             " (variant " + s + ").";
      break;
    case RequestTag::TmsUpdate:
      text = std::string(mock_text::kTmsHeaderExpertise) +
             "\nMock directory of contributions " + d + " (variant " + s + ").\n" +
             mock_text::kTmsHeaderKnowledge +
             "\nMock consensus and established facts " + d + ".\n" +
             mock_text::kTmsHeaderIssues +
             "\nMock open disagreements " + d + ".";
      break;
    case RequestTag::InitialGen:
      text = "Mock initial solution " + d + " (variant " + s + ").";
      break;
    case RequestTag::Refine:
      text = "Mock refined solution " + d + " (variant " + s + ").";
      break;
    case RequestTag::Synthesize:
      text = "Mock final synthesis " + d + " (variant " + s + ").";
      break;
    case RequestTag::Baseline:
      text = "Mock baseline response " + d + " (variant " + s + ").";
      break;
  }
  return Completion{std::move(text), "mock", std::chrono::milliseconds{0}, 0};
}

// One wire field per request field; tag is transcript bookkeeping only and
// stays off the wire. top_p/top_k are deliberately omitted.
inline json build_chat_payload(const ChatRequest& req, const std::string& model) {
  json messages = json::array();
  if (req.system_text)
    messages.push_back({{"role", "system"}, {"content", *req.system_text}});
  messages.push_back({{"role", "user"}, {"content", req.user_text}});
  json payload;
  payload["model"] = model;
  payload["messages"] = std::move(messages);
  payload["temperature"] = req.temperature;
  payload["frequency_penalty"] = req.frequency_penalty;
  payload["max_tokens"] = req.max_tokens;
  return payload;
}

inline std::string parse_chat_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw Error(Errc::MalformedResponse, "chat response is not valid JSON");
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
    throw Error(Errc::MalformedResponse, "chat response has no choices");
  const json& msg = j["choices"][0].value("message", json::object());
  std::string text = msg.value("content", "");
  if (text.empty())
    throw Error(Errc::MalformedResponse, "chat response has empty text");
  return text;
}

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // `call_salt` differentiates otherwise-identical requests on the mock
  // backend (per-agent/per-round); HTTP backends ignore it.
  virtual Completion complete(const ChatRequest& req, std::uint64_t call_salt) = 0;
};

class MockChatBackend final : public ChatBackend {
 public:
  explicit MockChatBackend(std::uint64_t seed) : seed_(seed) {}
  Completion complete(const ChatRequest& req, std::uint64_t call_salt) override {
    return mock_complete(req, seed_ ^ call_salt);
  }

 private:
  std::uint64_t seed_;
};

namespace detail {
// Splits "https://host:port/v1" into ("https://host:port", "/v1").
inline std::pair<std::string, std::string> split_base_url(const std::string& base) {
  auto scheme_end = base.find("://");
  auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {base, ""};
  std::string path = base.substr(path_start);
  if (!path.empty() && path.back() == '/') path.pop_back();
  return {base.substr(0, path_start), path};
}
}  // namespace detail

// HTTP POST with exponential backoff on transport errors and 5xx; other
// status codes fail immediately.
inline std::string http_post_json(const BackendDescriptor& backend, const std::string& path,
                                  const json& payload, int& retries_out) {
  auto [host, prefix] = detail::split_base_url(backend.base_url);
  const std::string body = payload.dump();
  std::string last_error;
  retries_out = 0;
  for (int attempt = 0; attempt <= backend.retry_limit; ++attempt) {
    if (attempt > 0) {
      retries_out = attempt;
      auto delay = backend.backoff_base_s * static_cast<double>(1ull << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    httplib::Client client(host);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!backend.api_key.empty())
      headers.emplace("Authorization", "Bearer " + backend.api_key);
    auto res = client.Post(prefix + path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error: HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw Error(Errc::BackendUnavailable,
                  "backend returned HTTP " + std::to_string(res->status) + ": " + res->body);
    return res->body;
  }
  throw Error(Errc::BackendUnavailable,
              "backend unavailable after " + std::to_string(backend.retry_limit + 1) +
                  " attempts (" + last_error + ")");
}

class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(BackendDescriptor backend) : backend_(std::move(backend)) {}

  Completion complete(const ChatRequest& req, std::uint64_t /*call_salt*/) override {
    if (trim(req.user_text).empty())
      throw Error(Errc::EmptyText, "chat request user_text must be non-empty");
    const json payload = build_chat_payload(req, backend_.model);
    int retries = 0;
    auto start = std::chrono::steady_clock::now();
    std::string body = http_post_json(backend_, "/chat/completions", payload, retries);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    return Completion{parse_chat_response(body), backend_.base_url, elapsed, retries};
  }

 private:
  BackendDescriptor backend_;
};

inline std::unique_ptr<ChatBackend> make_chat_backend(const EngineConfig& cfg) {
  if (cfg.chat_backend.kind == BackendKind::Mock)
    return std::make_unique<MockChatBackend>(cfg.rng_seed);
  return std::make_unique<HttpChatBackend>(cfg.chat_backend);
}

}  // namespace cothinker
