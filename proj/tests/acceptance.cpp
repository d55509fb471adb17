// Acceptance suite: one numbered criterion per claim the toolkit is expected
// to verify, each with its tolerance pinned in code. Run all criteria or a
// single one with --criterion k; every criterion prints one PASS/FAIL line
// and the process exits 0 only if everything passed.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "zrp/experiments.hpp"

using namespace zrp;

namespace {

constexpr std::uint64_t kSeed = 20240801;

struct Criterion {
    int id;
    std::string name;
    bool passed;
    std::string detail;
};

void announce(const Criterion& c) {
    std::cout << (c.passed ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.name
              << (c.detail.empty() ? "" : " -- " + c.detail) << "\n";
    std::cout.flush();
}

bool gate(const ExperimentReport& rep, const std::string& prefix = "") {
    bool ok = true;
    for (const auto& c : rep.checks)
        if (prefix.empty() || c.name.rfind(prefix, 0) == 0) ok &= c.passed;
    return ok;
}

ExperimentConfig base_config() {
    ExperimentConfig cfg;
    cfg.seed = kSeed;
    cfg.out_dir = "acceptance_out";
    return cfg;
}

// ---------------------------------------------------------------------------
// 1. Exact stationarity balance across rate families, theta, and boundaries.
Criterion criterion_1() {
    struct ModelCase {
        std::string g;
        double alpha, beta, lambda, delta;
    };
    const std::vector<ModelCase> cases = {
        {"linear", 1.0, 0.0, 0.0, 1.0},   {"linear", 1.0, 0.5, 0.3, 1.0},
        {"constant", 0.3, 0.0, 0.0, 1.0}, {"constant", 0.25, 0.1, 0.6, 1.2},
        {"capped(3)", 0.8, 0.0, 0.0, 1.0}, {"capped(3)", 0.8, 0.4, 0.5, 0.9},
    };
    const std::vector<int> Ns = {4, 10, 25};
    const int per_combo = 834;  // x 12 combos > 1e4 configurations
    double worst = 0.0;
    long total = 0;
    CounterRng rng(kSeed, 0, 11);
    for (const auto& mc : cases) {
        for (double theta : {1.0, 2.0}) {
            auto g = RateFunction::from_name(mc.g);
            GrandCanonical gc(g);
            for (int i = 0; i < per_combo; ++i) {
                int N = Ns[static_cast<std::size_t>(i) % Ns.size()];
                ModelParams p(N, theta, mc.alpha, g, false, mc.beta, mc.lambda, mc.delta);
                auto sampler = ProductMeasureSampler::stationary(gc, p);
                auto eta = sampler.sample(rng);
                double lam = total_rate(eta, p);
                if (lam <= 0.0) continue;
                double rel = std::abs(stationary_balance_residual(eta, p)) / lam;
                worst = std::max(worst, rel);
                ++total;
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "max |residual|/lambda = %.3e over %ld configurations",
                  worst, total);
    return {1, "exact stationarity balance <= 1e-10 * lambda(eta)", worst <= 1e-10, buf};
}

// ---------------------------------------------------------------------------
// 2. Truncated-chain linear-solve oracle vs the Lemma-1 product measure.
Criterion criterion_2() {
    auto cfg = base_config();
    cfg.N = 3;  // two sites
    cfg.theta = 1.0;
    cfg.alpha = 0.5;
    cfg.g_name = "linear";
    cfg.K_sweep = {10, 20, 30};
    auto rep = experiment_oracle(cfg);
    rep.print(std::cout);
    return {2, "oracle TV <= 1e-6 and strictly decreasing over K in {10,20,30}", rep.passed(), ""};
}

// ---------------------------------------------------------------------------
// 3. Stationarity under simulation: chi-squared vs the marginals.
Criterion criterion_3() {
    auto cfg = base_config();
    cfg.N = 20;
    cfg.theta = 1.0;
    cfg.alpha = 1.0;
    cfg.g_name = "linear";
    cfg.T = 2.0;
    cfg.replicas = 500;
    cfg.balance_configs = 500;
    cfg.chi2_level = 0.01;
    auto rep = experiment_invariance(cfg);
    rep.print(std::cout);
    return {3, "per-site occupancy chi-squared at level 0.01 (Bonferroni), N=20, T=2",
            rep.passed(), ""};
}

// ---------------------------------------------------------------------------
// 4. Hydrostatic limit at N = 200: theta = 1 profile and theta = 2 flatness.
Criterion criterion_4() {
    bool ok = true;
    std::string detail;
    for (double theta : {1.0, 2.0}) {
        auto cfg = base_config();
        cfg.N = 200;
        cfg.theta = theta;
        cfg.alpha = 1.0;
        cfg.g_name = "linear";
        cfg.burn_in = 1.0;
        cfg.T = 3.0;
        cfg.replicas = 32;
        cfg.out_dir = "acceptance_out/theta" + std::to_string(static_cast<int>(theta));
        auto rep = experiment_hydrostatic(cfg);
        rep.print(std::cout);
        ok &= rep.passed();
        detail += "theta=" + std::to_string(theta).substr(0, 3) + " max_z=" +
                  std::to_string(rep.checks.front().value) + "  ";
    }
    return {4, "time-averaged profile within 3 MC standard errors of R(phi)", ok, detail};
}

// ---------------------------------------------------------------------------
// 5. Hydrodynamic comparison against the Robin finite-volume solution.
Criterion criterion_5() {
    auto cfg = base_config();
    cfg.theta = 1.0;
    cfg.alpha = 1.0;
    cfg.g_name = "linear";
    cfg.initial = "constant";
    cfg.initial_value = 0.5;
    cfg.output_times = {0.1};
    cfg.N_sweep = {100, 200, 400};
    cfg.replicas = 200;
    cfg.eps = 0.05;
    cfg.M = 400;
    auto rep = experiment_hydrodynamic(cfg);
    rep.print(std::cout);
    return {5, "block-averaged empirical profile vs Robin FD: decreasing in N, <= 0.05 at N=400",
            rep.passed(), ""};
}

// ---------------------------------------------------------------------------
// 6. Neumann mass law (theta = 2) and exact discrete conservation.
Criterion criterion_6() {
    auto cfg = base_config();
    cfg.theta = 2.0;
    cfg.alpha = 1.0;
    cfg.g_name = "linear";
    cfg.initial = "constant";
    cfg.initial_value = 0.5;  // 0.5 R(alpha)
    cfg.output_times.clear();
    for (int i = 1; i <= 10; ++i) cfg.output_times.push_back(0.05 * i);
    cfg.N_sweep = {100, 200};
    cfg.replicas = 50;
    cfg.out_dir = "acceptance_out/neumann";
    auto rep = experiment_hydrodynamic(cfg);
    rep.print(std::cout);
    bool ok = gate(rep, "mass_drift_") && gate(rep, "pde_mass_per_step") &&
              gate(rep, "simulation_clean");
    return {6, "theta=2 mass drift <= 5/N over [0,0.5]; PDE mass conserved to 1e-12/step", ok, ""};
}

// ---------------------------------------------------------------------------
// 7. Martingale identities at N = 100 and 200.
Criterion criterion_7() {
    auto cfg = base_config();
    cfg.N = 100;
    cfg.theta = 1.0;
    cfg.alpha = 1.0;
    cfg.g_name = "linear";
    cfg.initial = "constant";
    cfg.initial_value = 0.5;
    cfg.test_function = "x(1-x)";
    cfg.output_times = {0.05, 0.1};
    cfg.replicas = 2000;
    auto rep = experiment_martingale(cfg);
    rep.print(std::cout);
    return {7, "mean M_t within 4 sigma of 0; Var/QV in [0.9,1.1]; Var halves when N doubles",
            rep.passed(), ""};
}

// ---------------------------------------------------------------------------
// 8. Drift oracle: closed-form Dynkin drift vs generator enumeration.
Criterion criterion_8() {
    CounterRng rng(kSeed, 0, 12);
    std::vector<TestFunction> gs = {TestFunction::from_name("x(1-x)"),
                                    TestFunction::polynomial({0.3, -1.0, 2.0, 0.7}),
                                    TestFunction::sine(2.5), TestFunction::cosine(1.7)};
    std::vector<RateFunction> rates = {RateFunction::linear(), RateFunction::constant(),
                                       RateFunction::capped(3.0)};
    double worst = 0.0;
    int count = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        int N = (rep % 3 == 0) ? 8 : (rep % 3 == 1) ? 20 : 50;
        double theta = (rep % 2 == 0) ? 1.0 : 2.0;
        const auto& g = rates[static_cast<std::size_t>(rep) % rates.size()];
        ModelParams p(N, theta, 0.9, g, true, 0.4, 0.2, 1.1);
        std::vector<std::uint32_t> occ(static_cast<std::size_t>(N - 1));
        for (auto& v : occ) v = static_cast<std::uint32_t>(rng() % 5);
        auto eta = Configuration::from_occupancies(occ);
        const auto& G = gs[static_cast<std::size_t>(rep) % gs.size()];
        auto f = [&](const Configuration& c) { return empirical_pairing(c, G); };
        double a = dynkin_drift(eta, G, p);
        double b = generator_apply(eta, p, f);
        worst = std::max(worst, std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}));
        ++count;
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "max relative gap %.3e over %d (eta, G) pairs", worst, count);
    return {8, "dynkin drift equals event enumeration to 1e-9 relative", worst <= 1e-9, buf};
}

// ---------------------------------------------------------------------------
// 9. PDE convergence: cosine-mode order and Robin steady state.
Criterion criterion_9() {
    auto cfg = base_config();
    cfg.theta = 1.0;
    cfg.alpha = 1.0;
    cfg.g_name = "linear";  // Phi = identity
    cfg.M_sweep = {100, 200, 400};
    cfg.M = 100;
    auto rep = experiment_pde_convergence(cfg);
    rep.print(std::cout);
    return {9, "L-inf order >= 1.9 over M in {100,200,400}; Robin steady state within 2 alpha h",
            rep.passed(), ""};
}

// ---------------------------------------------------------------------------
// 10. Attractiveness: ordering holds over 1e7 joint events.
Criterion criterion_10() {
    auto cfg = base_config();
    cfg.N = 50;
    cfg.theta = 1.0;
    cfg.alpha = 1.0;
    cfg.g_name = "linear";
    cfg.events = 10000000;
    auto rep = experiment_attractiveness(cfg);
    rep.print(std::cout);
    return {10, "coupled ordering never violated across 1e7 joint events", rep.passed(), ""};
}

// ---------------------------------------------------------------------------
// 11. Replacement diagnostics decrease along N.
Criterion criterion_11() {
    auto cfg = base_config();
    cfg.theta = 1.0;
    cfg.alpha = 1.0;
    cfg.g_name = "linear";
    cfg.initial = "constant";
    cfg.initial_value = 0.5;
    cfg.test_function = "x2";
    cfg.eps = 0.1;
    cfg.T = 0.1;
    cfg.N_sweep = {100, 200, 400};
    cfg.replicas = 40;
    auto rep = experiment_replacement(cfg);
    rep.print(std::cout);
    return {11, "|R4| and |R^b| decrease along N in {100,200,400} within 1 MC standard error",
            rep.passed(), ""};
}

Criterion run_criterion(int id) {
    switch (id) {
    case 1: return criterion_1();
    case 2: return criterion_2();
    case 3: return criterion_3();
    case 4: return criterion_4();
    case 5: return criterion_5();
    case 6: return criterion_6();
    case 7: return criterion_7();
    case 8: return criterion_8();
    case 9: return criterion_9();
    case 10: return criterion_10();
    case 11: return criterion_11();
    default: throw std::runtime_error("criterion id must be 1..11");
    }
}

} // namespace

int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            ids.push_back(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: acceptance [--criterion k]\n";
            return 2;
        }
    }
    if (ids.empty())
        for (int k = 1; k <= 11; ++k) ids.push_back(k);

    int failures = 0;
    for (int id : ids) {
        try {
            auto c = run_criterion(id);
            announce(c);
            failures += c.passed ? 0 : 1;
        } catch (const std::exception& e) {
            announce({id, "criterion raised", false, e.what()});
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}
