#include "adp/plan.hpp"

#include "adp/error.hpp"
#include "adp/rng.hpp"
#include "adp/topk.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace adp {

const char* selection_name(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::random: return "random";
    case SelectionMode::retrieval_partition: return "retrieval_partition";
    case SelectionMode::retrieval_per_anchor: return "retrieval_per_anchor";
  }
  return "random";
}

std::optional<SelectionMode> parse_selection(std::string_view name) {
  for (SelectionMode mode : {SelectionMode::random, SelectionMode::retrieval_partition,
                             SelectionMode::retrieval_per_anchor}) {
    if (name == selection_name(mode)) return mode;
  }
  return std::nullopt;
}

std::size_t BatchPlan::total_positions() const {
  std::size_t total = 0;
  for (const auto& batch : batches) total += batch.size();
  return total;
}

std::string BatchPlan::to_bytes() const {
  json header;
  header["record"] = "header";
  header["mode"] = selection_name(mode);
  header["seed"] = seed;
  header["n"] = batch_size;
  header["provider"] = provider_id;
  header["metric"] = metric;
  header["order"] = "anchor-desc-sim";
  std::string out = header.dump();
  out += '\n';
  for (std::size_t b = 0; b < batches.size(); ++b) {
    for (std::size_t p = 0; p < batches[b].size(); ++p) {
      json record;
      record["batch_index"] = b;
      record["position"] = p;
      record["id"] = batches[b][p];
      out += record.dump();
      out += '\n';
    }
  }
  return out;
}

BatchPlan plan_batches_random(const Dataset& dataset, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(Errc::n_out_of_range, "batch size must be >= 1");
  std::vector<std::string> ids;
  ids.reserve(dataset.points.size());
  for (const auto& point : dataset.points) ids.push_back(point.id);
  Rng rng(seed);
  rng.shuffle(ids);

  BatchPlan plan;
  plan.batch_size = n;
  plan.mode = SelectionMode::random;
  plan.seed = seed;
  for (std::size_t start = 0; start < ids.size(); start += n) {
    const std::size_t end = std::min(start + n, ids.size());
    plan.batches.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(start),
                              ids.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return plan;
}

namespace {

SimCorpus build_corpus(const Dataset& dataset,
                       const std::map<std::string, EmbeddingVector>& embeddings) {
  SimCorpus corpus;
  corpus.count = dataset.points.size();
  for (std::size_t i = 0; i < dataset.points.size(); ++i) {
    const auto& point = dataset.points[i];
    auto it = embeddings.find(point.id);
    if (it == embeddings.end())
      throw Error(Errc::missing_embedding, fmt::format("id '{}'", point.id));
    const auto& vec = it->second;
    if (corpus.dim == 0) {
      corpus.dim = vec.dim();
    } else if (vec.dim() != corpus.dim) {
      throw Error(Errc::dimension_mismatch,
                  fmt::format("embedding dims {} vs {}", corpus.dim, vec.dim()));
    }
    corpus.data.insert(corpus.data.end(), vec.values.begin(), vec.values.end());
    corpus.norms.push_back(vec.norm);
    corpus.tie_rank.push_back(point.source_row);
  }
  return corpus;
}

}  // namespace

BatchPlan plan_batches_retrieval(const Dataset& dataset,
                                 const std::map<std::string, EmbeddingVector>& embeddings,
                                 std::size_t n, std::uint64_t seed, SelectionMode mode) {
  if (mode == SelectionMode::random)
    throw Error(Errc::config_invalid, "use plan_batches_random for random selection");
  if (n < 2) throw Error(Errc::n_out_of_range, "retrieval selection needs batch size >= 2");

  const SimCorpus corpus = build_corpus(dataset, embeddings);
  BatchPlan plan;
  plan.batch_size = n;
  plan.mode = mode;
  plan.seed = seed;

  auto id_of = [&](std::size_t index) { return dataset.points[index].id; };

  if (mode == SelectionMode::retrieval_per_anchor) {
    const auto neighbors = topk_neighbors_parallel(corpus, n - 1);
    for (std::size_t i = 0; i < corpus.count; ++i) {
      std::vector<std::string> batch;
      batch.reserve(1 + neighbors[i].size());
      batch.push_back(id_of(i));
      for (std::size_t j : neighbors[i]) batch.push_back(id_of(j));
      plan.batches.push_back(std::move(batch));
    }
    return plan;
  }

  // retrieval_partition: seeded anchor draw from the remaining pool, then the
  // most similar remaining points join the anchor's batch
  Rng rng(seed);
  std::vector<std::size_t> pool(corpus.count);
  for (std::size_t i = 0; i < corpus.count; ++i) pool[i] = i;
  while (!pool.empty()) {
    const std::size_t pick = static_cast<std::size_t>(rng.below(pool.size()));
    const std::size_t anchor = pool[pick];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));

    const auto partners = topk_among(corpus, anchor, pool, n - 1);
    std::vector<std::string> batch;
    batch.reserve(1 + partners.size());
    batch.push_back(id_of(anchor));
    for (std::size_t j : partners) batch.push_back(id_of(j));
    plan.batches.push_back(std::move(batch));

    std::vector<std::size_t> next_pool;
    next_pool.reserve(pool.size());
    for (std::size_t candidate : pool) {
      if (std::find(partners.begin(), partners.end(), candidate) == partners.end())
        next_pool.push_back(candidate);
    }
    pool = std::move(next_pool);
  }
  return plan;
}

void save_plan(const BatchPlan& plan, const std::filesystem::path& path) {
  write_file(path, plan.to_bytes());
}

BatchPlan load_plan(const std::filesystem::path& path) {
  const auto records = read_jsonl(path);
  if (records.empty() || records.front().value("record", "") != "header")
    throw Error(Errc::bad_record, fmt::format("{}: missing plan header", path.string()));
  const json& header = records.front();
  BatchPlan plan;
  plan.batch_size = header.value("n", std::size_t{0});
  plan.seed = header.value("seed", std::uint64_t{0});
  plan.provider_id = header.value("provider", "");
  plan.metric = header.value("metric", "cosine");
  const auto mode = parse_selection(header.value("mode", ""));
  if (!mode) throw Error(Errc::bad_record, "plan header has unknown mode");
  plan.mode = *mode;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const json& record = records[i];
    const std::size_t batch_index = record.value("batch_index", std::size_t{0});
    if (plan.batches.size() <= batch_index) plan.batches.resize(batch_index + 1);
    plan.batches[batch_index].push_back(record.value("id", ""));
  }
  return plan;
}

}  // namespace adp
