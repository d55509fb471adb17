#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "zrp/product_measure.hpp"
#include "zrp/rng.hpp"
#include "zrp/simulator.hpp"

namespace zrp {

template <class R>
struct EnsembleResult {
    std::vector<std::optional<R>> results;   // one slot per replica
    std::vector<std::string> errors;         // "replica k: what"
    bool ok() const { return errors.empty(); }
};

/// Run `worker(replica)` for replica = 0..replicas-1 on a thread pool.
/// A replica that throws is recorded in `errors` without aborting siblings.
/// Workers must derive all randomness from the replica index so that results
/// are independent of scheduling.
template <class Fn>
auto parallel_replicas(int replicas, Fn&& worker, unsigned threads = 0)
    -> EnsembleResult<decltype(worker(0))> {
    using R = decltype(worker(0));
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(replicas));

    EnsembleResult<R> out;
    out.results.resize(static_cast<std::size_t>(replicas));
    std::vector<std::string> errs(static_cast<std::size_t>(replicas));
    std::atomic<int> next{0};

    auto body = [&]() {
        for (;;) {
            int r = next.fetch_add(1);
            if (r >= replicas) return;
            try {
                out.results[static_cast<std::size_t>(r)] = worker(r);
            } catch (const std::exception& e) {
                errs[static_cast<std::size_t>(r)] =
                    "replica " + std::to_string(r) + ": " + e.what();
            }
        }
    };

    if (threads <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errs)
        if (!e.empty()) out.errors.push_back(e);
    return out;
}

/// Seeded ensemble of trajectories: replica r samples its initial
/// configuration with stream (seed, r, 1) and runs the dynamics with stream
/// (seed, r, 0). Bit-reproducible from (master seed, replica index).
inline EnsembleResult<Trajectory> ensemble_run(const ModelParams& p,
                                               const ProductMeasureSampler& init_sampler,
                                               double T, std::vector<double> schedule,
                                               int replicas, std::uint64_t master_seed,
                                               unsigned threads = 0) {
    return parallel_replicas(
        replicas,
        [&](int r) {
            CounterRng init_rng(master_seed, static_cast<std::uint64_t>(r), 1);
            CounterRng dyn_rng(master_seed, static_cast<std::uint64_t>(r), 0);
            Configuration eta0 = init_sampler.sample(init_rng);
            return run(p, std::move(eta0), T, schedule, dyn_rng);
        },
        threads);
}

} // namespace zrp
