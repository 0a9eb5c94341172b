#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace horo {

/// Worker count used by the chunked reductions below. Results never depend
/// on it: chunk boundaries are fixed and partial sums are combined in a
/// fixed tree order.
void set_thread_count(int threads);
int thread_count();

inline constexpr std::size_t kReductionChunk = 4096;

/// Pairwise (tree) summation in index order.
std::complex<double> pairwise_sum(std::span<const std::complex<double>> terms);
double pairwise_sum(std::span<const double> terms);

/// Runs body(i) for i in [0, count) across the configured workers. body must
/// only write to slot i of caller-owned storage.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Sum of term(i) for i in [0, count), evaluated in fixed-size chunks that
/// may run concurrently; each chunk is tree-summed, then the chunk partials
/// are tree-summed.
template <class Term>
std::complex<double> chunked_sum(std::size_t count, Term&& term) {
  const std::size_t chunks = (count + kReductionChunk - 1) / kReductionChunk;
  std::vector<std::complex<double>> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * kReductionChunk;
    const std::size_t end = std::min(count, begin + kReductionChunk);
    std::vector<std::complex<double>> local(end - begin);
    for (std::size_t i = begin; i < end; ++i) local[i - begin] = term(i);
    partial[c] = pairwise_sum(local);
  });
  return pairwise_sum(partial);
}

}  // namespace horo
