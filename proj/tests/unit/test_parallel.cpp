#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include "hypodiff/parallel.hpp"

using namespace hypodiff;

TEST(Parallel, EveryIndexVisitedOnce) {
  for (unsigned threads : {1u, 3u, 8u}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    }, 7);
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(Parallel, LowestFailingChunkIsRethrown) {
  try {
    parallel_for(100, 4, [](std::size_t b, std::size_t) {
      if (b >= 30) throw std::runtime_error("chunk " + std::to_string(b));
    }, 10);
    ADD_FAILURE();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "chunk 30");
  }
}

TEST(Parallel, PairwiseSumAndMeanSe) {
  std::vector<double> v(1001);
  std::iota(v.begin(), v.end(), 0.0);
  EXPECT_DOUBLE_EQ(pairwise_sum(v), 500500.0);
  const MeanSe m = mean_se(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
}

TEST(Parallel, ThreadsFromEnvironment) {
  ::setenv(kThreadsEnv, "3", 1);
  EXPECT_EQ(resolve_threads(0), 3u);
  EXPECT_EQ(resolve_threads(5), 5u);
  ::unsetenv(kThreadsEnv);
  EXPECT_GE(resolve_threads(0), 1u);
}
