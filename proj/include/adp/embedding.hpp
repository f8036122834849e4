#pragma once

#include "adp/dataset.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace adp {

struct EmbeddingVector {
  std::vector<double> values;
  double norm = 0.0;

  std::size_t dim() const { return values.size(); }

  /// Validates finiteness and caches the Euclidean norm.
  static EmbeddingVector of(std::vector<double> values);
};

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
};

/// Offline fallback: hashed bag of tokens. Lowercased whitespace tokens, each
/// hashed to a bucket with a +-1 sign from a second hash, L2-normalized.
/// Deterministic and order-invariant by construction.
class HashedBagEmbedder final : public EmbeddingProvider {
 public:
  explicit HashedBagEmbedder(std::size_t dim = 256) : dim_(dim) {}
  std::string id() const override;
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

  std::vector<double> embed_one(const std::string& text) const;

 private:
  std::size_t dim_;
};

/// OpenAI-style /embeddings endpoint. Configured from environment or
/// explicit arguments; only used when a live embedding provider is requested.
class HttpEmbedder final : public EmbeddingProvider {
 public:
  HttpEmbedder(std::string base_url, std::string api_key, std::string model);
  std::string id() const override;
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override;

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_;
};

std::unique_ptr<EmbeddingProvider> make_provider(const std::string& name);

/// JSONL-backed cache keyed by (provider id, text hash). Writes append and
/// flush under a mutex; reads are lock-free after load.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path file);

  std::optional<std::vector<double>> get(const std::string& provider,
                                         const std::string& text_hash) const;
  void put(const std::string& provider, const std::string& text_hash,
           const std::vector<double>& values);
  std::size_t size() const { return entries_.size(); }

 private:
  std::filesystem::path file_;
  std::unordered_map<std::string, std::vector<double>> entries_;
  mutable std::mutex write_mutex_;
};

/// Embedding input for one data point: field values joined in field_names
/// order with a single newline.
std::string similarity_text(const TaskSpec& spec, const DataPoint& point);

std::string text_hash(std::string_view text);

std::map<std::string, EmbeddingVector> embed_corpus(const Dataset& dataset,
                                                    EmbeddingProvider& provider,
                                                    EmbeddingCache* cache = nullptr);

}  // namespace adp
