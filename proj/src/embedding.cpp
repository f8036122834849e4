#include "adp/embedding.hpp"

#include "adp/error.hpp"
#include "adp/gateway.hpp"
#include "adp/hash.hpp"
#include "adp/text.hpp"

#include <fmt/format.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <cstdlib>
#include <fstream>

namespace adp {

EmbeddingVector EmbeddingVector::of(std::vector<double> values) {
  if (values.empty()) throw Error(Errc::dimension_mismatch, "empty embedding vector");
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(Errc::bad_record, "non-finite embedding component");
    sum += v * v;
  }
  EmbeddingVector vec;
  vec.values = std::move(values);
  vec.norm = std::sqrt(sum);
  return vec;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim())
    throw Error(Errc::dimension_mismatch, fmt::format("dims {} vs {}", a.dim(), b.dim()));
  if (a.norm <= 0.0 || b.norm <= 0.0) throw Error(Errc::zero_vector, "zero-norm embedding");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  return dot / (a.norm * b.norm);
}

std::string HashedBagEmbedder::id() const { return fmt::format("local-bag{}-v1", dim_); }

std::vector<double> HashedBagEmbedder::embed_one(const std::string& input) const {
  std::vector<double> vec(dim_, 0.0);
  bool any = false;
  for (const auto& token : text::tokens(input)) {
    const std::uint64_t bucket_hash = fnv1a64(token);
    const std::uint64_t sign_hash = fnv1a64(token, 0x9E3779B97F4A7C15ull);
    const std::size_t bucket = static_cast<std::size_t>(bucket_hash % dim_);
    vec[bucket] += (sign_hash & 1u) ? 1.0 : -1.0;
    any = true;
  }
  if (!any) {
    vec[0] = 1.0;  // empty text still gets a unit vector
    return vec;
  }
  double sum = 0.0;
  for (double v : vec) sum += v * v;
  if (sum > 0.0) {
    const double inv = 1.0 / std::sqrt(sum);
    for (double& v : vec) v *= inv;
  } else {
    vec[0] = 1.0;  // tokens cancelled out exactly
  }
  return vec;
}

std::vector<std::vector<double>> HashedBagEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<double>> out(texts.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(texts.size()); ++i) {
    out[static_cast<std::size_t>(i)] = embed_one(texts[static_cast<std::size_t>(i)]);
  }
  return out;
}

HttpEmbedder::HttpEmbedder(std::string base_url, std::string api_key, std::string model)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)) {}

std::string HttpEmbedder::id() const { return fmt::format("http:{}", model_); }

std::vector<std::vector<double>> HttpEmbedder::embed(const std::vector<std::string>& texts) {
  auto transport = make_http_transport(base_url_, api_key_);
  json body;
  body["model"] = model_;
  body["input"] = texts;
  const auto reply = transport->post_json("/embeddings", body.dump());
  if (reply.status == 401 || reply.status == 403)
    throw Error(Errc::auth_failure, fmt::format("embedding endpoint returned {}", reply.status));
  if (reply.status != 200)
    throw Error(Errc::provider_unavailable,
                fmt::format("embedding endpoint returned {}", reply.status));
  json payload = json::parse(reply.body, nullptr, false);
  if (payload.is_discarded() || !payload.contains("data"))
    throw Error(Errc::provider_unavailable, "malformed embedding response");
  std::vector<std::vector<double>> out;
  out.resize(texts.size());
  for (const auto& item : payload["data"]) {
    const std::size_t index = item.value("index", out.size());
    if (index >= out.size()) throw Error(Errc::provider_unavailable, "embedding index out of range");
    out[index] = item["embedding"].get<std::vector<double>>();
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& name) {
  if (name == "local" || name.empty()) return std::make_unique<HashedBagEmbedder>();
  if (name.rfind("http:", 0) == 0) {
    const char* base = std::getenv("ADP_EMBED_BASE_URL");
    const char* key = std::getenv("ADP_EMBED_API_KEY");
    if (base == nullptr)
      throw Error(Errc::provider_unavailable, "ADP_EMBED_BASE_URL not set for http provider");
    return std::make_unique<HttpEmbedder>(base, key ? key : "", name.substr(5));
  }
  throw Error(Errc::provider_unavailable, fmt::format("unknown embedding provider '{}'", name));
}

EmbeddingCache::EmbeddingCache(std::filesystem::path file) : file_(std::move(file)) {
  if (!std::filesystem::exists(file_)) return;
  for (const auto& record : read_jsonl(file_)) {
    const std::string key =
        record.value("provider", "") + "\x1f" + record.value("text_hash", "");
    entries_[key] = record.value("values", std::vector<double>{});
  }
}

std::optional<std::vector<double>> EmbeddingCache::get(const std::string& provider,
                                                       const std::string& text_hash) const {
  auto it = entries_.find(provider + "\x1f" + text_hash);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::put(const std::string& provider, const std::string& text_hash,
                         const std::vector<double>& values) {
  std::lock_guard<std::mutex> lock(write_mutex_);
  const std::string key = provider + "\x1f" + text_hash;
  if (entries_.count(key)) return;
  entries_[key] = values;
  json record;
  record["provider"] = provider;
  record["text_hash"] = text_hash;
  record["dim"] = values.size();
  record["values"] = values;
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  if (!out) throw Error(Errc::io_error, fmt::format("cannot append {}", file_.string()));
  out << record.dump() << '\n';
  out.flush();
}

std::string similarity_text(const TaskSpec& spec, const DataPoint& point) {
  std::string text;
  for (const auto& name : spec.field_names) {
    if (!text.empty()) text += '\n';
    text += point.field(name);
  }
  return text;
}

std::string text_hash(std::string_view text) { return hex64(fnv1a64(text)); }

std::map<std::string, EmbeddingVector> embed_corpus(const Dataset& dataset,
                                                    EmbeddingProvider& provider,
                                                    EmbeddingCache* cache) {
  const std::string provider_id = provider.id();
  std::map<std::string, EmbeddingVector> out;

  std::vector<std::size_t> missing;
  std::vector<std::string> missing_texts;
  std::vector<std::string> hashes(dataset.points.size());
  for (std::size_t i = 0; i < dataset.points.size(); ++i) {
    const std::string text = similarity_text(dataset.spec, dataset.points[i]);
    hashes[i] = text_hash(text);
    std::optional<std::vector<double>> cached;
    if (cache != nullptr) cached = cache->get(provider_id, hashes[i]);
    if (cached) {
      out.emplace(dataset.points[i].id, EmbeddingVector::of(std::move(*cached)));
    } else {
      missing.push_back(i);
      missing_texts.push_back(text);
    }
  }

  if (!missing.empty()) {
    auto vectors = provider.embed(missing_texts);
    if (vectors.size() != missing.size())
      throw Error(Errc::provider_unavailable, "provider returned wrong vector count");
    for (std::size_t k = 0; k < missing.size(); ++k) {
      if (cache != nullptr) cache->put(provider_id, hashes[missing[k]], vectors[k]);
      out.emplace(dataset.points[missing[k]].id, EmbeddingVector::of(std::move(vectors[k])));
    }
  }

  std::size_t dim = 0;
  for (const auto& [id, vec] : out) {
    if (dim == 0) dim = vec.dim();
    if (vec.dim() != dim)
      throw Error(Errc::dimension_mismatch,
                  fmt::format("provider returned dims {} and {}", dim, vec.dim()));
  }
  return out;
}

}  // namespace adp
