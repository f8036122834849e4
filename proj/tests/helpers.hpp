#pragma once

#include "adp/dataset.hpp"
#include "adp/embedding.hpp"
#include "adp/plan.hpp"
#include "adp/prompt.hpp"
#include "adp/rng.hpp"

#include <fmt/format.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

namespace adp::testing {

inline std::filesystem::path repo_root() { return std::filesystem::path(ADP_REPO_ROOT); }

inline std::filesystem::path fresh_dir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const auto dir = std::filesystem::temp_directory_path() /
                   fmt::format("adp_{}_{}_{}", tag, ::getpid(), counter.fetch_add(1));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Dataset sample_dataset(TaskId task) {
  return load_dataset(repo_root() / "data" / "samples" /
                          fmt::format("{}.jsonl", task_name(task)),
                      TaskSpec::builtin(task));
}

/// Tiny in-code RTE corpus for unit tests that do not want file IO.
inline Dataset tiny_rte(std::size_t n) {
  Dataset dataset;
  dataset.spec = TaskSpec::builtin(TaskId::rte);
  for (std::size_t i = 0; i < n; ++i) {
    DataPoint point;
    point.id = fmt::format("t{:03}", i);
    point.fields["premise"] = fmt::format("Worker {} finished shift number {} early.", i, i * 3);
    point.fields["hypothesis"] = fmt::format("Shift {} ended ahead of schedule.", i * 3);
    point.gold = AnswerValue::of_class(static_cast<int>(i % 2));
    point.source_row = static_cast<int>(i);
    dataset.points.push_back(std::move(point));
  }
  dataset.checksum = dataset_checksum(dataset.points);
  return dataset;
}

inline DataPoint placeholder_point(const TaskSpec& spec, const std::string& id,
                                   const std::string& filler, int row) {
  DataPoint point;
  point.id = id;
  for (const auto& name : spec.field_names) point.fields[name] = filler;
  point.gold = spec.answer_kind == AnswerKind::binary_class ? AnswerValue::of_class(0)
                                                            : AnswerValue::of_number(0);
  point.source_row = row;
  return point;
}

inline std::vector<DataPoint> placeholder_batch(TaskId task, std::size_t n,
                                                const std::string& filler) {
  const TaskSpec spec = TaskSpec::builtin(task);
  std::vector<DataPoint> batch;
  for (std::size_t i = 0; i < n; ++i) {
    batch.push_back(placeholder_point(spec, fmt::format("p{}", i), filler, static_cast<int>(i)));
  }
  return batch;
}

// ---- independent brute-force selection oracle (test-only) ----
// Materializes the full |D| x |D| similarity matrix and sorts whole rows;
// shares nothing with the partial-sort kernels it checks.

struct OracleCorpus {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> data;
  std::vector<int> ties;
};

inline double oracle_cosine(const OracleCorpus& c, std::size_t i, std::size_t j) {
  double dot = 0.0;
  double ni = 0.0;
  double nj = 0.0;
  for (std::size_t d = 0; d < c.dim; ++d) {
    dot += c.data[i * c.dim + d] * c.data[j * c.dim + d];
    ni += c.data[i * c.dim + d] * c.data[i * c.dim + d];
    nj += c.data[j * c.dim + d] * c.data[j * c.dim + d];
  }
  return dot / (std::sqrt(ni) * std::sqrt(nj));
}

inline std::vector<std::vector<double>> oracle_matrix(const OracleCorpus& c) {
  std::vector<std::vector<double>> sim(c.count, std::vector<double>(c.count, 0.0));
  for (std::size_t i = 0; i < c.count; ++i)
    for (std::size_t j = 0; j < c.count; ++j)
      if (i != j) sim[i][j] = oracle_cosine(c, i, j);
  return sim;
}

inline std::vector<std::size_t> oracle_row_topk(const OracleCorpus& c,
                                                const std::vector<std::vector<double>>& sim,
                                                std::size_t anchor,
                                                const std::vector<std::size_t>& pool,
                                                std::size_t k) {
  std::vector<std::size_t> sorted(pool);
  std::erase(sorted, anchor);
  std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
    if (sim[anchor][a] != sim[anchor][b]) return sim[anchor][a] > sim[anchor][b];
    return c.ties[a] < c.ties[b];
  });
  if (sorted.size() > k) sorted.resize(k);
  return sorted;
}

inline std::vector<std::vector<std::size_t>> oracle_per_anchor(const OracleCorpus& c,
                                                               std::size_t k) {
  const auto sim = oracle_matrix(c);
  std::vector<std::size_t> everyone(c.count);
  for (std::size_t i = 0; i < c.count; ++i) everyone[i] = i;
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < c.count; ++i) {
    std::vector<std::size_t> batch{i};
    for (std::size_t j : oracle_row_topk(c, sim, i, everyone, k)) batch.push_back(j);
    out.push_back(std::move(batch));
  }
  return out;
}

inline std::vector<std::vector<std::size_t>> oracle_partition(const OracleCorpus& c,
                                                              std::size_t n,
                                                              std::uint64_t seed) {
  const auto sim = oracle_matrix(c);
  Rng rng(seed);
  std::vector<std::size_t> pool(c.count);
  for (std::size_t i = 0; i < c.count; ++i) pool[i] = i;
  std::vector<std::vector<std::size_t>> out;
  while (!pool.empty()) {
    const std::size_t pick = static_cast<std::size_t>(rng.below(pool.size()));
    const std::size_t anchor = pool[pick];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    auto partners = oracle_row_topk(c, sim, anchor, pool, n - 1);
    std::vector<std::size_t> batch{anchor};
    for (std::size_t j : partners) batch.push_back(j);
    out.push_back(batch);
    std::vector<std::size_t> next;
    for (std::size_t candidate : pool)
      if (std::find(partners.begin(), partners.end(), candidate) == partners.end())
        next.push_back(candidate);
    pool = std::move(next);
  }
  return out;
}

/// Corpus builder with deliberate duplicate embeddings to force tie cases.
inline OracleCorpus random_oracle_corpus(Rng& rng, std::size_t count, std::size_t dim,
                                         bool with_duplicates) {
  OracleCorpus corpus;
  corpus.count = count;
  corpus.dim = dim;
  corpus.data.resize(count * dim);
  // small discrete value set makes exact similarity collisions likely
  for (double& v : corpus.data) v = static_cast<double>(rng.below(7)) - 3.0;
  for (std::size_t i = 0; i < count; ++i) {
    bool zero = true;
    for (std::size_t d = 0; d < dim; ++d) zero = zero && corpus.data[i * dim + d] == 0.0;
    if (zero) corpus.data[i * dim] = 1.0;
  }
  if (with_duplicates && count >= 2) {
    for (std::size_t i = 1; i < count; i += 3) {
      const std::size_t src = rng.below(i);
      for (std::size_t d = 0; d < dim; ++d) corpus.data[i * dim + d] = corpus.data[src * dim + d];
    }
  }
  corpus.ties.resize(count);
  for (std::size_t i = 0; i < count; ++i) corpus.ties[i] = static_cast<int>(i);
  return corpus;
}

inline Dataset corpus_dataset(const OracleCorpus& corpus) {
  Dataset dataset;
  dataset.spec = TaskSpec::builtin(TaskId::gsm8k);
  for (std::size_t i = 0; i < corpus.count; ++i) {
    DataPoint point;
    point.id = fmt::format("c{:04}", i);
    point.fields["question"] = fmt::format("placeholder question {}", i);
    point.gold = AnswerValue::of_number(static_cast<double>(i));
    point.source_row = static_cast<int>(i);
    dataset.points.push_back(std::move(point));
  }
  dataset.checksum = dataset_checksum(dataset.points);
  return dataset;
}

inline std::map<std::string, EmbeddingVector> corpus_embeddings(const OracleCorpus& corpus,
                                                                const Dataset& dataset) {
  std::map<std::string, EmbeddingVector> out;
  for (std::size_t i = 0; i < corpus.count; ++i) {
    std::vector<double> values(corpus.data.begin() + static_cast<std::ptrdiff_t>(i * corpus.dim),
                               corpus.data.begin() +
                                   static_cast<std::ptrdiff_t>((i + 1) * corpus.dim));
    out.emplace(dataset.points[i].id, EmbeddingVector::of(std::move(values)));
  }
  return out;
}

}  // namespace adp::testing
