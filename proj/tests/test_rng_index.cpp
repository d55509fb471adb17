#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "zrp/rate_index.hpp"
#include "zrp/rng.hpp"

using namespace zrp;

TEST(CounterRng, Deterministic) {
    CounterRng a(123, 4, 5), b(123, 4, 5), c(123, 5, 5), d(123, 4, 6);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
    bool differs_replica = false, differs_purpose = false;
    CounterRng a2(123, 4, 5);
    for (int i = 0; i < 100; ++i) {
        auto v = a2();
        differs_replica |= v != c();
        differs_purpose |= v != d();
    }
    EXPECT_TRUE(differs_replica);
    EXPECT_TRUE(differs_purpose);
}

TEST(CounterRng, UniformMoments) {
    CounterRng rng(9, 0);
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        s += u;
        s2 += u * u;
    }
    // mean 1/2 (sd of mean ~ 0.00091), second moment 1/3
    EXPECT_NEAR(s / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
    EXPECT_NEAR(s2 / n, 1.0 / 3.0, 0.004);
}

TEST(CounterRng, ExponentialMean) {
    CounterRng rng(10, 0);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += rng.exponential(2.0);
    EXPECT_NEAR(s / n, 0.5, 4.0 * 0.5 / std::sqrt(n));
}

TEST(RateIndex, MatchesBruteForce) {
    CounterRng rng(31, 0);
    RateIndex idx(37);
    std::vector<double> ref(37, 0.0);
    for (int step = 0; step < 2000; ++step) {
        int i = static_cast<int>(rng() % 37);
        double r = rng.uniform() * 3.0;
        idx.set(i, r);
        ref[i] = r;
        if (step % 97 == 0) {
            double tot = 0.0;
            for (double v : ref) tot += v;
            EXPECT_NEAR(idx.total(), tot, 1e-9 * std::max(1.0, tot));
            // sampled slot must own the cumulative position
            double u = rng.uniform() * idx.total();
            int s = idx.sample(u);
            double before = 0.0;
            for (int j = 0; j < s; ++j) before += ref[j];
            EXPECT_LE(before, u + 1e-9);
            EXPECT_LT(u, before + ref[s] + 1e-9);
        }
    }
}

TEST(RateIndex, SamplingProportions) {
    RateIndex idx(5);
    std::vector<double> rates = {0.5, 0.0, 2.0, 1.0, 0.25};
    for (int i = 0; i < 5; ++i) idx.set(i, rates[i]);
    CounterRng rng(55, 0);
    const int n = 200000;
    std::vector<int> counts(5, 0);
    for (int i = 0; i < n; ++i) ++counts[idx.sample(rng.uniform() * idx.total())];
    EXPECT_EQ(counts[1], 0);
    for (int i = 0; i < 5; ++i) {
        double p = rates[i] / 3.75;
        EXPECT_NEAR(counts[i], n * p, 4.0 * std::sqrt(n * p * (1 - p)) + 1.0);
    }
}

TEST(RateIndex, RebuildDriftSmall) {
    RateIndex idx(64);
    CounterRng rng(77, 0);
    for (int step = 0; step < 1000000; ++step)
        idx.set(static_cast<int>(rng() % 64), rng.uniform());
    double total_before = idx.total();
    double drift = idx.rebuild();
    EXPECT_LT(drift, 1e-9 * std::max(1.0, total_before));
    EXPECT_NEAR(idx.total(), total_before, 1e-9 * std::max(1.0, total_before));
}
