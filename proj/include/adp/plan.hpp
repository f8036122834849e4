#pragma once

#include "adp/dataset.hpp"
#include "adp/embedding.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace adp {

enum class SelectionMode { random, retrieval_partition, retrieval_per_anchor };

const char* selection_name(SelectionMode mode);
std::optional<SelectionMode> parse_selection(std::string_view name);

struct BatchPlan {
  std::vector<std::vector<std::string>> batches;  // ordered ids; anchor at position 0
  std::size_t batch_size = 0;
  SelectionMode mode = SelectionMode::random;
  std::uint64_t seed = 0;
  std::string provider_id;  // empty for random plans
  std::string metric = "cosine";

  std::size_t total_positions() const;
  /// Canonical byte serialization (header record + one record per position).
  std::string to_bytes() const;
};

BatchPlan plan_batches_random(const Dataset& dataset, std::size_t n, std::uint64_t seed);

BatchPlan plan_batches_retrieval(const Dataset& dataset,
                                 const std::map<std::string, EmbeddingVector>& embeddings,
                                 std::size_t n, std::uint64_t seed, SelectionMode mode);

void save_plan(const BatchPlan& plan, const std::filesystem::path& path);
BatchPlan load_plan(const std::filesystem::path& path);

}  // namespace adp
