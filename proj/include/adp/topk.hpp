#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adp {

/// Flattened embedding corpus for the similarity kernels. `tie_rank` supplies
/// the deterministic tie-break (ascending) between equal similarities.
struct SimCorpus {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> data;   // row-major, count x dim
  std::vector<double> norms;  // Euclidean norms, all > 0
  std::vector<int> tie_rank;

  double cosine(std::size_t i, std::size_t j) const;
};

/// For every anchor, the k nearest neighbors (excluding the anchor) ordered
/// by descending cosine, ties by ascending tie_rank. k is clamped to count-1.
std::vector<std::vector<std::size_t>> topk_neighbors_serial(const SimCorpus& corpus,
                                                            std::size_t k);

/// OpenMP variant, parallel over anchors. Each row is computed by exactly one
/// thread with the serial inner loop, so results are bit-identical to
/// topk_neighbors_serial regardless of scheduling.
std::vector<std::vector<std::size_t>> topk_neighbors_parallel(const SimCorpus& corpus,
                                                              std::size_t k);

/// Top-k for a single anchor restricted to `pool` (anchor excluded if present).
std::vector<std::size_t> topk_among(const SimCorpus& corpus, std::size_t anchor,
                                    std::span<const std::size_t> pool, std::size_t k);

}  // namespace adp
