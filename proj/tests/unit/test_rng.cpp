#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "collenc/parallel.hpp"
#include "collenc/rng.hpp"

using namespace collenc;

TEST(CounterRng, SameKeySameStream) {
    CounterRng a(42), b(42);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, DrawIsPureFunctionOfCounter) {
    CounterRng a(7);
    for (int i = 0; i < 10; ++i) a.next_u64();
    CounterRng b(7, 10);
    EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, SplitStreamsDiffer) {
    const CounterRng root(3);
    CounterRng a = root.split(0), b = root.split(1);
    EXPECT_NE(a.next_u64(), b.next_u64());
    EXPECT_EQ(root.split(5).key(), derive_key(3, 5));
}

TEST(CounterRng, UniformBoundsAndMean) {
    CounterRng rng(11);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(CounterRng, UniformIntCoversInclusiveRange) {
    CounterRng rng(5);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        const auto v = rng.uniform_int(-2, 3);
        ASSERT_GE(v, -2);
        ASSERT_LE(v, 3);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 6u);
}

TEST(CounterRng, NormalMoments) {
    CounterRng rng(9);
    double s = 0.0, s2 = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        ASSERT_TRUE(std::isfinite(x));
        s += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.02);
    EXPECT_NEAR(s2 / n, 1.0, 0.03);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ParallelFor, RethrowsWorkerException) {
    EXPECT_THROW(parallel_for(100, 3,
                              [](std::size_t i) {
                                  if (i == 42) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}
