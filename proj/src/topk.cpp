#include "adp/topk.hpp"

#include "adp/error.hpp"

#include <algorithm>
#include <cmath>

namespace adp {

namespace {

// Orders candidate indices for one anchor: similarity descending, tie_rank
// ascending. Similarities are computed with the same sequential dot product
// everywhere so serial, parallel, and test-oracle paths agree bitwise.
struct Scored {
  double sim;
  int tie;
  std::size_t index;
};

inline bool better(const Scored& a, const Scored& b) {
  if (a.sim != b.sim) return a.sim > b.sim;
  return a.tie < b.tie;
}

std::vector<std::size_t> anchor_topk(const SimCorpus& corpus, std::size_t anchor,
                                     const std::vector<std::size_t>& candidates, std::size_t k) {
  std::vector<Scored> scored;
  scored.reserve(candidates.size());
  for (std::size_t j : candidates) {
    if (j == anchor) continue;
    scored.push_back({corpus.cosine(anchor, j), corpus.tie_rank[j], j});
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), better);
  std::vector<std::size_t> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].index);
  return out;
}

std::vector<std::size_t> all_indices(std::size_t count) {
  std::vector<std::size_t> indices(count);
  for (std::size_t i = 0; i < count; ++i) indices[i] = i;
  return indices;
}

}  // namespace

double SimCorpus::cosine(std::size_t i, std::size_t j) const {
  const double* a = data.data() + i * dim;
  const double* b = data.data() + j * dim;
  double dot = 0.0;
  for (std::size_t d = 0; d < dim; ++d) dot += a[d] * b[d];
  if (norms[i] <= 0.0 || norms[j] <= 0.0) throw Error(Errc::zero_vector, "zero-norm embedding");
  return dot / (norms[i] * norms[j]);
}

std::vector<std::vector<std::size_t>> topk_neighbors_serial(const SimCorpus& corpus,
                                                            std::size_t k) {
  const auto candidates = all_indices(corpus.count);
  std::vector<std::vector<std::size_t>> out(corpus.count);
  for (std::size_t i = 0; i < corpus.count; ++i) out[i] = anchor_topk(corpus, i, candidates, k);
  return out;
}

std::vector<std::vector<std::size_t>> topk_neighbors_parallel(const SimCorpus& corpus,
                                                              std::size_t k) {
  const auto candidates = all_indices(corpus.count);
  std::vector<std::vector<std::size_t>> out(corpus.count);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(corpus.count); ++i) {
    out[static_cast<std::size_t>(i)] =
        anchor_topk(corpus, static_cast<std::size_t>(i), candidates, k);
  }
  return out;
}

std::vector<std::size_t> topk_among(const SimCorpus& corpus, std::size_t anchor,
                                    std::span<const std::size_t> pool, std::size_t k) {
  std::vector<std::size_t> candidates(pool.begin(), pool.end());
  return anchor_topk(corpus, anchor, candidates, k);
}

}  // namespace adp
