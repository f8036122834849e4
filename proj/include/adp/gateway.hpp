#pragma once

#include "adp/dataset.hpp"
#include "adp/error.hpp"
#include "adp/prompt.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace adp {

enum class BackendKind { live, replay, mock };
const char* backend_name(BackendKind kind);
std::optional<BackendKind> parse_backend(std::string_view name);

struct ChatRequest {
  std::string model_id;
  std::string prompt_text;
  double temperature = 0.0;
  int max_output_tokens = 1;

  void validate() const;
  /// Content hash of (model_id, prompt_text, temperature, max_output_tokens).
  std::string request_key() const;
};

struct ChatResponse {
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long latency_ms = 0;
  BackendKind backend = BackendKind::mock;
  bool truncated = false;
};

/// Append-only JSONL response cache keyed by request_key.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path file);

  std::optional<ChatResponse> find(const std::string& request_key) const;
  void put(const ChatRequest& request, const ChatResponse& response);
  std::size_t size() const { return entries_.size(); }
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  std::unordered_map<std::string, ChatResponse> entries_;
  mutable std::mutex write_mutex_;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual BackendKind kind() const = 0;
  /// Blocking from the caller's view; concurrency lives in dispatch_batch.
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

class ReplayBackend final : public ChatBackend {
 public:
  explicit ReplayBackend(std::shared_ptr<ResponseCache> cache) : cache_(std::move(cache)) {}
  BackendKind kind() const override { return BackendKind::replay; }
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ResponseCache> cache_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{1000};
  double multiplier = 2.0;
};

/// Transport seam for the live backend; tests substitute fault-injecting
/// doubles, production uses the httplib implementation.
class HttpTransport {
 public:
  struct Reply {
    int status = 0;
    std::string body;
  };
  virtual ~HttpTransport() = default;
  /// Throws Error(transport) on connection-level failure.
  virtual Reply post_json(const std::string& path, const std::string& body) = 0;
};

std::unique_ptr<HttpTransport> make_http_transport(const std::string& base_url,
                                                   const std::string& api_key);

struct LiveConfig {
  std::string base_url;   // e.g. https://api.example.com/v1
  std::string api_key;
  std::string completions_path = "/chat/completions";
  RetryPolicy retry;
  /// Read ADP_API_BASE_URL / ADP_API_KEY; nullopt when not configured.
  static std::optional<LiveConfig> from_env();
};

/// Provider-agnostic chat-completions client: single user message,
/// temperature, max tokens. Retries transport errors and 429/5xx with
/// bounded exponential backoff; records every success into the cache.
class LiveBackend final : public ChatBackend {
 public:
  using SleepFn = std::function<void(std::chrono::milliseconds)>;

  LiveBackend(LiveConfig config, std::unique_ptr<HttpTransport> transport,
              std::shared_ptr<ResponseCache> record_cache = nullptr, SleepFn sleep = {});

  BackendKind kind() const override { return BackendKind::live; }
  ChatResponse complete(const ChatRequest& request) override;

 private:
  LiveConfig config_;
  std::unique_ptr<HttpTransport> transport_;
  std::shared_ptr<ResponseCache> record_cache_;
  SleepFn sleep_;
};

struct MockKnobs {
  bool drop_last_item = false;    // omit the final item's block
  bool mangle_repetition = false; // repeat a different item's input text
  bool wrong_count_extra = false; // emit one fabricated extra block
  int wrong_answer_period = 0;    // every k-th item per batch answered wrong
};

/// Echo-oracle: parses the serialized items out of an incoming prompt and
/// answers them from a gold answer book in the template's output format.
/// Deterministic and shareable across threads.
class MockBackend final : public ChatBackend {
 public:
  MockBackend(PromptTemplate tmpl, const Dataset& answer_book, MockKnobs knobs = {},
              std::shared_ptr<ResponseCache> record_cache = nullptr);

  BackendKind kind() const override { return BackendKind::mock; }
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::string answer_text(const AnswerValue& gold, bool corrupt) const;

  PromptTemplate tmpl_;
  TaskSpec spec_;
  std::unordered_map<std::string, AnswerValue> book_;  // fields part -> gold
  MockKnobs knobs_;
  std::shared_ptr<ResponseCache> record_cache_;
};

struct DispatchOutcome {
  std::optional<ChatResponse> response;
  std::optional<Errc> error;
  std::string error_message;

  bool ok() const { return response.has_value(); }
};

/// Issues requests with at most max_in_flight outstanding; outcomes are
/// returned in request order and per-request failures stay positional.
std::vector<DispatchOutcome> dispatch_batch(std::span<const ChatRequest> requests,
                                            ChatBackend& backend, int max_in_flight);

}  // namespace adp
