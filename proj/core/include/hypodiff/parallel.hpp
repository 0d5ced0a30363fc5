#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace hypodiff {

/// Environment variable consulted when a thread count of 0 is requested.
inline constexpr const char* kThreadsEnv = "HYPODIFF_THREADS";

/// 0 -> $HYPODIFF_THREADS, else hardware concurrency; never returns 0.
unsigned resolve_threads(unsigned requested);

/// Runs body(begin, end) over [0, n) in chunks on `threads` workers. Outputs
/// must be written per index; the chunking never affects results. The
/// exception from the lowest failing chunk is rethrown.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t chunk = 256);

/// Pairwise (tree) summation in index order.
double pairwise_sum(std::span<const double> values);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(n)
};

MeanSe mean_se(std::span<const double> values);

}  // namespace hypodiff
