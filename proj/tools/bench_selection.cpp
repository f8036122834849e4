// Compares the serial reference top-k kernel against the OpenMP variant on a
// synthetic corpus and checks that they agree exactly.

#include "adp/rng.hpp"
#include "adp/topk.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cmath>

namespace {

adp::SimCorpus random_corpus(std::size_t count, std::size_t dim, std::uint64_t seed) {
  adp::Rng rng(seed);
  adp::SimCorpus corpus;
  corpus.count = count;
  corpus.dim = dim;
  corpus.data.resize(count * dim);
  for (double& v : corpus.data) {
    v = static_cast<double>(rng.next() >> 11) / static_cast<double>(1ull << 53) - 0.5;
  }
  corpus.norms.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    double sum = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = corpus.data[i * dim + d];
      sum += v * v;
    }
    corpus.norms[i] = std::sqrt(sum);
    corpus.tie_rank.push_back(static_cast<int>(i));
  }
  return corpus;
}

template <typename F>
double time_ms(F&& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"benchmark: serial vs OpenMP top-k neighbor kernel"};
  std::size_t count = 2000;
  std::size_t dim = 256;
  std::size_t k = 15;
  int repeats = 3;
  std::uint64_t seed = 1;
  app.add_option("--count", count, "corpus size");
  app.add_option("--dim", dim, "embedding dimension");
  app.add_option("--k", k, "neighbors per anchor");
  app.add_option("--repeats", repeats, "timing repeats");
  app.add_option("--seed", seed, "corpus seed");
  CLI11_PARSE(app, argc, argv);

  const adp::SimCorpus corpus = random_corpus(count, dim, seed);
#ifdef _OPENMP
  fmt::print("corpus {} x {}, k={}, omp threads {}\n", count, dim, k, omp_get_max_threads());
#else
  fmt::print("corpus {} x {}, k={} (OpenMP disabled)\n", count, dim, k);
#endif

  std::vector<std::vector<std::size_t>> serial;
  std::vector<std::vector<std::size_t>> parallel;
  double serial_best = 1e300;
  double parallel_best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    serial_best = std::min(serial_best, time_ms([&] { serial = adp::topk_neighbors_serial(corpus, k); }));
    parallel_best =
        std::min(parallel_best, time_ms([&] { parallel = adp::topk_neighbors_parallel(corpus, k); }));
  }

  if (serial != parallel) {
    fmt::print(stderr, "MISMATCH between serial and parallel kernels\n");
    return 1;
  }
  fmt::print("serial   {:>10.2f} ms\n", serial_best);
  fmt::print("parallel {:>10.2f} ms\n", parallel_best);
  fmt::print("speedup  {:>10.2f}x (results identical)\n", serial_best / parallel_best);
  return 0;
}
