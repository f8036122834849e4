#include "adp/gateway.hpp"

#include "adp/hash.hpp"
#include "adp/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace adp {

const char* backend_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::live: return "live";
    case BackendKind::replay: return "replay";
    case BackendKind::mock: return "mock";
  }
  return "mock";
}

std::optional<BackendKind> parse_backend(std::string_view name) {
  for (BackendKind kind : {BackendKind::live, BackendKind::replay, BackendKind::mock}) {
    if (name == backend_name(kind)) return kind;
  }
  return std::nullopt;
}

void ChatRequest::validate() const {
  if (temperature < 0.0 || temperature > 2.0)
    throw Error(Errc::config_invalid, fmt::format("temperature {} out of [0,2]", temperature));
  if (max_output_tokens <= 0)
    throw Error(Errc::config_invalid, "max_output_tokens must be positive");
  if (model_id.empty()) throw Error(Errc::config_invalid, "model_id empty");
}

std::string ChatRequest::request_key() const {
  std::uint64_t state = kFnvOffset;
  state = fnv1a64(model_id, state);
  state = fnv1a64("\x1f", state);
  state = fnv1a64(prompt_text, state);
  state = fnv1a64("\x1f", state);
  state = fnv1a64(fmt::format("{}", temperature), state);
  state = fnv1a64("\x1f", state);
  state = fnv1a64(fmt::format("{}", max_output_tokens), state);
  return hex64(state);
}

namespace {

json response_record(const ChatRequest& request, const ChatResponse& response) {
  json record;
  record["request_key"] = request.request_key();
  record["model_id"] = request.model_id;
  record["prompt_text"] = request.prompt_text;
  record["temperature"] = request.temperature;
  record["max_output_tokens"] = request.max_output_tokens;
  record["text"] = response.text;
  record["prompt_tokens"] = response.prompt_tokens;
  record["completion_tokens"] = response.completion_tokens;
  record["latency_ms"] = response.latency_ms;
  record["backend"] = backend_name(response.backend);
  record["truncated"] = response.truncated;
  return record;
}

ChatResponse response_from_record(const json& record) {
  ChatResponse response;
  response.text = record.value("text", "");
  response.prompt_tokens = record.value("prompt_tokens", 0L);
  response.completion_tokens = record.value("completion_tokens", 0L);
  response.latency_ms = record.value("latency_ms", 0L);
  response.truncated = record.value("truncated", false);
  if (auto kind = parse_backend(record.value("backend", "mock"))) response.backend = *kind;
  return response;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path file) : file_(std::move(file)) {
  if (!std::filesystem::exists(file_)) return;
  for (const auto& record : read_jsonl(file_)) {
    entries_[record.value("request_key", "")] = response_from_record(record);
  }
}

std::optional<ChatResponse> ResponseCache::find(const std::string& request_key) const {
  auto it = entries_.find(request_key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const ChatRequest& request, const ChatResponse& response) {
  std::lock_guard<std::mutex> lock(write_mutex_);
  const std::string key = request.request_key();
  if (entries_.count(key)) return;  // append-only, first write wins
  entries_[key] = response;
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  if (!out) throw Error(Errc::io_error, fmt::format("cannot append {}", file_.string()));
  out << response_record(request, response).dump() << '\n';
  out.flush();
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
  auto hit = cache_->find(request.request_key());
  if (!hit)
    throw Error(Errc::cache_miss,
                fmt::format("request_key {} not in {}", request.request_key(),
                            cache_->file().string()));
  hit->backend = BackendKind::replay;
  return *hit;
}

std::optional<LiveConfig> LiveConfig::from_env() {
  const char* base = std::getenv("ADP_API_BASE_URL");
  if (base == nullptr || *base == '\0') return std::nullopt;
  LiveConfig config;
  config.base_url = base;
  if (const char* key = std::getenv("ADP_API_KEY")) config.api_key = key;
  return config;
}

LiveBackend::LiveBackend(LiveConfig config, std::unique_ptr<HttpTransport> transport,
                         std::shared_ptr<ResponseCache> record_cache, SleepFn sleep)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      record_cache_(std::move(record_cache)),
      sleep_(std::move(sleep)) {
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatResponse LiveBackend::complete(const ChatRequest& request) {
  request.validate();
  json body;
  body["model"] = request.model_id;
  body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt_text}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  const std::string payload = body.dump();

  const RetryPolicy& retry = config_.retry;
  std::chrono::milliseconds delay = retry.base_delay;
  for (int attempt = 1; attempt <= retry.max_attempts; ++attempt) {
    const auto started = std::chrono::steady_clock::now();

    // retry only transport failures and rate-limit/5xx signals
    std::optional<std::string> transient_reason;
    std::optional<HttpTransport::Reply> reply;
    try {
      reply = transport_->post_json(config_.completions_path, payload);
    } catch (const Error& e) {
      if (e.code() != Errc::transport) throw;
      transient_reason = e.what();
    }
    if (reply) {
      if (reply->status == 401 || reply->status == 403)
        throw Error(Errc::auth_failure, fmt::format("endpoint returned {}", reply->status));
      if (reply->status == 429 || reply->status >= 500) {
        transient_reason = fmt::format("http {}", reply->status);
      } else if (reply->status != 200) {
        throw Error(Errc::transport, fmt::format("endpoint returned {}", reply->status));
      }
    }
    if (!transient_reason) {
      json parsed = json::parse(reply->body, nullptr, false);
      if (parsed.is_discarded()) throw Error(Errc::transport, "endpoint returned malformed JSON");
      ChatResponse response;
      response.backend = BackendKind::live;
      const auto& choice = parsed.at("choices").at(0);
      response.text = choice.at("message").at("content").get<std::string>();
      response.truncated = choice.value("finish_reason", "stop") == "length";
      if (parsed.contains("usage")) {
        response.prompt_tokens = parsed["usage"].value("prompt_tokens", 0L);
        response.completion_tokens = parsed["usage"].value("completion_tokens", 0L);
      }
      response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::steady_clock::now() - started)
                                .count();
      if (record_cache_) record_cache_->put(request, response);
      return response;
    }
    if (attempt == retry.max_attempts)
      throw Error(Errc::transient_exhausted,
                  fmt::format("{} attempts; last: {}", attempt, *transient_reason));
    sleep_(delay);
    delay = std::chrono::milliseconds(
        static_cast<long>(static_cast<double>(delay.count()) * retry.multiplier));
  }
  throw Error(Errc::transient_exhausted, "retry loop exhausted");
}

MockBackend::MockBackend(PromptTemplate tmpl, const Dataset& answer_book, MockKnobs knobs,
                         std::shared_ptr<ResponseCache> record_cache)
    : tmpl_(std::move(tmpl)),
      spec_(answer_book.spec),
      knobs_(knobs),
      record_cache_(std::move(record_cache)) {
  for (const auto& point : answer_book.points) {
    book_[tmpl_.serializer.render_fields(point)] = point.gold;
  }
}

std::string MockBackend::answer_text(const AnswerValue& gold, bool corrupt) const {
  if (gold.is_class()) {
    int index = gold.cls();
    if (corrupt) index = (index + 1) % static_cast<int>(spec_.class_labels.size());
    return spec_.class_labels[static_cast<std::size_t>(index)];
  }
  return text::format_decimal(corrupt ? gold.num() + 1.0 : gold.num());
}

ChatResponse MockBackend::complete(const ChatRequest& request) {
  struct PromptItem {
    long printed = 0;
    std::string fields;
  };
  const std::string marker = tmpl_.serializer.item_marker();
  std::vector<PromptItem> found;
  for (const auto& line : text::split_lines(request.prompt_text)) {
    const std::string t = text::trim(line);
    if (t.empty() || t.front() == '{') continue;  // exemplar and demo lines are braced
    if (t.rfind(marker, 0) != 0) continue;
    std::size_t i = marker.size();
    if (i >= t.size() || t[i] != ' ') continue;
    ++i;
    std::size_t digits = i;
    long printed = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) {
      printed = printed * 10 + (t[i] - '0');
      ++i;
    }
    if (i == digits || i + 1 >= t.size() || t[i] != ':' || t[i + 1] != ' ') continue;
    found.push_back({printed, t.substr(i + 2)});
  }

  std::vector<std::string> blocks;
  const bool adp = tmpl_.mode == PromptMode::auto_demo;
  for (std::size_t k = 0; k < found.size(); ++k) {
    if (knobs_.drop_last_item && k + 1 == found.size()) break;
    auto it = book_.find(found[k].fields);
    if (it == book_.end())
      throw Error(Errc::config_invalid,
                  fmt::format("mock answer book has no entry for item '{}'", found[k].fields));
    const bool corrupt =
        knobs_.wrong_answer_period > 0 &&
        (k + 1) % static_cast<std::size_t>(knobs_.wrong_answer_period) == 0;
    const std::string answer = answer_text(it->second, corrupt);
    std::string block = "{";
    if (adp) {
      std::string repeat = found[k].fields;
      if (knobs_.mangle_repetition) {
        if (found.size() > 1) {
          repeat = found[(k + 1) % found.size()].fields;
        } else {
          std::reverse(repeat.begin(), repeat.end());
        }
      }
      block += fmt::format("{} {}: {}", marker, found[k].printed, repeat);
      block += ", ";
    }
    block += tmpl_.serializer.render_output(static_cast<int>(found[k].printed), answer);
    block += "}";
    blocks.push_back(std::move(block));
  }
  if (knobs_.wrong_count_extra && !found.empty()) {
    const long printed = found.back().printed + 1;
    const std::string answer =
        spec_.answer_kind == AnswerKind::binary_class ? spec_.class_labels[0] : "0";
    std::string block = "{";
    if (adp) block += fmt::format("{} {}: unrequested extra item, ", marker, printed);
    block += tmpl_.serializer.render_output(static_cast<int>(printed), answer);
    block += "}";
    blocks.push_back(std::move(block));
  }

  ChatResponse response;
  response.backend = BackendKind::mock;
  response.text = fmt::format("{}", fmt::join(blocks, "\n"));
  response.prompt_tokens = static_cast<long>(estimate_tokens(request.prompt_text));
  response.completion_tokens = static_cast<long>(estimate_tokens(response.text));
  response.latency_ms = 0;
  if (record_cache_) record_cache_->put(request, response);
  return response;
}

std::vector<DispatchOutcome> dispatch_batch(std::span<const ChatRequest> requests,
                                            ChatBackend& backend, int max_in_flight) {
  if (max_in_flight < 1) throw Error(Errc::config_invalid, "max_in_flight must be >= 1");
  std::vector<DispatchOutcome> outcomes(requests.size());
  if (requests.empty()) return outcomes;

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= requests.size()) return;
      try {
        outcomes[i].response = backend.complete(requests[i]);
      } catch (const Error& e) {
        outcomes[i].error = e.code();
        outcomes[i].error_message = e.what();
      } catch (const std::exception& e) {
        outcomes[i].error = Errc::transport;
        outcomes[i].error_message = e.what();
      }
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(max_in_flight), requests.size());
  if (workers <= 1) {
    worker();
    return outcomes;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();
  return outcomes;
}

}  // namespace adp
