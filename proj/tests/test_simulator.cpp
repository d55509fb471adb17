#include <cmath>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "zrp/ensemble.hpp"
#include "zrp/product_measure.hpp"
#include "zrp/simulator.hpp"

using namespace zrp;

TEST(Simulator, OnlyPossibleEventFires) {
    // empty system with alpha > 0, beta = 0: CreateLeft is the only event
    ModelParams p(5, 1.0, 1.0, RateFunction::linear());
    CounterRng rng(1, 0);
    for (int rep = 0; rep < 10; ++rep) {
        Simulator sim(p, Configuration(4), rng);
        auto [ev, dt] = sim.step();
        EXPECT_EQ(ev.kind, EventKind::CreateLeft);
        EXPECT_GT(dt, 0.0);
        EXPECT_EQ(sim.creations(), 1u);
        rng = sim.rng();
    }
}

TEST(Simulator, AbsorbedWhenNothingMoves) {
    ModelParams p(5, 1.0, 0.0, RateFunction::linear());
    CounterRng rng(2, 0);
    Simulator sim(p, Configuration(4), rng);
    EXPECT_THROW(sim.step(), Absorbed);
}

TEST(Simulator, EventLawIsMultinomial) {
    // freeze one configuration; the first event's law is rates/total
    ModelParams p(5, 1.0, 0.8, RateFunction::linear(), true, 0.3, 0.5, 1.0);
    auto eta0 = Configuration::from_occupancies({2, 0, 1, 3});
    CounterRng rng(3, 0);
    const int draws = 200000;
    std::map<std::tuple<int, int, int>, int> counts;
    for (int i = 0; i < draws; ++i) {
        Simulator sim(p, eta0, rng);
        auto [ev, dt] = sim.step();
        ++counts[{static_cast<int>(ev.kind), ev.x, ev.dir}];
        rng = sim.rng();
    }
    double total = total_rate(eta0, p);
    for (const Event& ev : all_events(5)) {
        double prob = event_rate(eta0, ev, p) / total;
        int c = counts[{static_cast<int>(ev.kind), ev.x, ev.dir}];
        double sigma = std::sqrt(draws * prob * (1.0 - prob));
        EXPECT_NEAR(c, draws * prob, 4.0 * sigma + 1.0)
            << "event kind " << static_cast<int>(ev.kind) << " x " << ev.x;
    }
}

TEST(Simulator, WaitingTimeMatchesTotalRate) {
    ModelParams p(5, 1.0, 0.8, RateFunction::linear());
    auto eta0 = Configuration::from_occupancies({2, 0, 1, 3});
    CounterRng rng(4, 0);
    const int draws = 100000;
    double s = 0.0;
    for (int i = 0; i < draws; ++i) {
        Simulator sim(p, eta0, rng);
        s += sim.step().second;
        rng = sim.rng();
    }
    double mean = 1.0 / total_rate(eta0, p);
    EXPECT_NEAR(s / draws, mean, 4.0 * mean / std::sqrt(draws));
}

TEST(Simulator, ZeroHorizonKeepsInitialSnapshot) {
    ModelParams p(5, 1.0, 1.0, RateFunction::linear());
    auto eta0 = Configuration::from_occupancies({1, 1, 0, 2});
    auto traj = run(p, eta0, 0.0, {0.0}, CounterRng(5, 0));
    ASSERT_EQ(traj.snapshots.size(), 1u);
    EXPECT_EQ(traj.snapshots[0], eta0);
}

TEST(Simulator, ClosedBulkConservesMass) {
    // no reservoirs at all: same particle count in every snapshot
    ModelParams p(8, 1.0, 0.0, RateFunction::linear(), true, 0.0, 0.0, 0.0);
    auto eta0 = Configuration::from_occupancies({3, 0, 2, 0, 0, 1, 4});
    auto traj = run(p, eta0, 0.5, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5}, CounterRng(6, 0));
    ASSERT_EQ(traj.snapshots.size(), 6u);
    for (const auto& snap : traj.snapshots) EXPECT_EQ(snap.total(), eta0.total());
}

TEST(Simulator, CreationCounterIsPoisson) {
    // diffusive theta=1: Y_T is Poisson with mean alpha N^{2-theta} T = alpha N T
    const int N = 20;
    const double T = 0.5, alpha = 1.0;
    ModelParams p(N, 1.0, alpha, RateFunction::linear());
    const int R = 200;
    double sum = 0.0;
    for (int r = 0; r < R; ++r) {
        Simulator sim(p, Configuration(N - 1), CounterRng(7, r));
        NullObserver nop;
        sim.run_until(T, nop);
        sum += static_cast<double>(sim.creations());
    }
    double mean = alpha * N * T;
    EXPECT_NEAR(sum / R, mean, 4.0 * std::sqrt(mean / R));
}

TEST(Simulator, AbsorbingRunTerminatesEarly) {
    ModelParams p(4, 1.0, 0.0, RateFunction::linear());
    auto eta0 = Configuration::from_occupancies({1, 0, 1});
    Simulator sim(p, eta0, CounterRng(8, 0));
    NullObserver nop;
    sim.run_until(50.0, nop);
    EXPECT_EQ(sim.config().total(), 0u);
    EXPECT_EQ(sim.time(), 50.0);
    EXPECT_EQ(sim.total_rate_cached(), 0.0);
}

TEST(Simulator, RebuildDriftStaysTiny) {
    ModelParams p(10, 1.0, 1.0, RateFunction::linear());
    GrandCanonical gc(RateFunction::linear());
    CounterRng init_rng(9, 0);
    auto eta0 = ProductMeasureSampler::stationary(gc, p).sample(init_rng);
    Simulator sim(p, eta0, CounterRng(9, 1));
    NullObserver nop;
    sim.run_until(900.0, nop);  // > 2e6 events on this system
    ASSERT_GT(sim.events(), 2000000u);
    EXPECT_LT(sim.last_rebuild_drift(), 1e-9 * std::max(1.0, sim.total_rate_cached()));
}

TEST(Ensemble, BitReproducible) {
    ModelParams p(8, 1.0, 0.7, RateFunction::linear());
    GrandCanonical gc(RateFunction::linear());
    auto sampler = ProductMeasureSampler::stationary(gc, p);
    std::vector<double> sched = {0.1, 0.2};
    auto a = ensemble_run(p, sampler, 0.2, sched, 6, 12345);
    auto b = ensemble_run(p, sampler, 0.2, sched, 6, 12345, 1);  // single-threaded
    ASSERT_TRUE(a.ok());
    ASSERT_TRUE(b.ok());
    for (int r = 0; r < 6; ++r) {
        ASSERT_TRUE(a.results[r] && b.results[r]);
        for (std::size_t i = 0; i < 2; ++i)
            EXPECT_EQ(a.results[r]->snapshots[i], b.results[r]->snapshots[i]);
    }
}

TEST(Ensemble, SingleReplicaMatchesPlainRun) {
    ModelParams p(8, 1.0, 0.7, RateFunction::linear());
    GrandCanonical gc(RateFunction::linear());
    auto sampler = ProductMeasureSampler::stationary(gc, p);
    auto ens = ensemble_run(p, sampler, 0.3, {0.3}, 1, 99);
    CounterRng init_rng(99, 0, 1);
    auto eta0 = sampler.sample(init_rng);
    auto direct = run(p, eta0, 0.3, {0.3}, CounterRng(99, 0, 0));
    ASSERT_TRUE(ens.ok());
    EXPECT_EQ(ens.results[0]->snapshots[0], direct.snapshots[0]);
}

TEST(Ensemble, ErrorsCollectedPerReplica) {
    auto res = parallel_replicas(4, [](int r) {
        if (r == 2) throw std::runtime_error("boom");
        return r * r;
    });
    EXPECT_EQ(res.errors.size(), 1u);
    EXPECT_TRUE(res.errors[0].find("replica 2") != std::string::npos);
    EXPECT_EQ(*res.results[3], 9);
    EXPECT_FALSE(res.results[2].has_value());
}

TEST(Ensemble, StationaryMeansMatchInvariantMeasure) {
    // short smoke version of the invariance experiment
    const int N = 6;
    ModelParams p(N, 1.0, 1.0, RateFunction::linear());
    GrandCanonical gc(RateFunction::linear());
    auto sampler = ProductMeasureSampler::stationary(gc, p);
    auto prof = fugacity_profile(p);
    const int R = 400;
    std::vector<double> mean(N - 1, 0.0);
    auto ens = ensemble_run(p, sampler, 1.0, {1.0}, R, 2024);
    ASSERT_TRUE(ens.ok());
    for (const auto& t : ens.results)
        for (int x = 1; x <= N - 1; ++x) mean[x - 1] += t->snapshots[0].at(x);
    for (int x = 1; x <= N - 1; ++x) {
        double rho = gc.density(prof(x));
        double var = gc.moment(prof(x), 2) - rho * rho;
        EXPECT_NEAR(mean[x - 1] / R, rho, 4.0 * std::sqrt(var / R));
    }
}
