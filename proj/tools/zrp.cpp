// Command-line driver for the boundary driven zero-range toolkit: exact
// simulation, invariant-measure analytics, the hydrodynamic finite-volume
// solver, and the experiment suite. One JSON config file describes a run;
// see README.md for the schema. Exit code 0 means every check passed.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "zrp/csv.hpp"
#include "zrp/experiments.hpp"
#include "zrp/serialize.hpp"

namespace {

zrp::ExperimentConfig load_config(const std::string& path, std::uint64_t* seed_override,
                                  std::string* out_override, std::string* format_override) {
    zrp::ExperimentConfig cfg = path.empty() ? zrp::ExperimentConfig{}
                                             : zrp::ExperimentConfig::from_file(path);
    if (seed_override) cfg.seed = *seed_override;
    if (out_override) cfg.out_dir = *out_override;
    if (format_override) cfg.format = *format_override;
    return cfg;
}

int finish(const zrp::ExperimentReport& rep) {
    rep.print(std::cout);
    std::cout << (rep.passed() ? "PASSED" : "FAILED") << ": " << rep.experiment << "\n";
    return rep.passed() ? 0 : 1;
}

int run_pde_solve(const zrp::ExperimentConfig& cfg) {
    auto gc = cfg.make_gc();
    auto phi = zrp::PhiMap::tabulated(gc);
    zrp::BoundarySpec bc{cfg.kappa(), cfg.alpha, cfg.beta, cfg.lambda, cfg.delta};
    zrp::SolveControls ctl;
    ctl.cfl = cfg.cfl;
    ctl.output_times = cfg.output_times;
    if (ctl.output_times.empty()) ctl.output_times = {cfg.T};
    auto sol = zrp::solve(zrp::DensityField::from_profile(cfg.M, cfg.initial_profile()), bc, phi,
                          ctl.output_times.back(), ctl);
    auto dir = std::filesystem::path(cfg.out_dir) / "pde-solve";
    std::filesystem::create_directories(dir);
    zrp::CsvWriter csv(dir / "solution.csv", {"t", "u", "rho"});
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        for (int i = 0; i < sol.fields[k].M(); ++i)
            csv.row(sol.times[k], sol.fields[k].cell_center(i),
                    sol.fields[k].rho[static_cast<std::size_t>(i)]);
    std::cout << "wrote " << (dir / "solution.csv").string() << "\n";
    return 0;
}

int run_simulate(const zrp::ExperimentConfig& cfg) {
    auto gc = cfg.make_gc();
    auto p = cfg.make_params();
    auto sampler = cfg.make_initial_sampler(gc);
    std::vector<double> sched = cfg.output_times.empty() ? std::vector<double>{cfg.T}
                                                         : cfg.output_times;
    auto ens = zrp::ensemble_run(p, sampler, sched.back(), sched, cfg.replicas, cfg.seed,
                                 cfg.threads);
    auto dir = std::filesystem::path(cfg.out_dir) / "simulate";
    std::filesystem::create_directories(dir / "snapshots");
    zrp::CsvWriter csv(dir / "trajectory.csv", {"replica", "t", "x", "eta"});
    for (int r = 0; r < cfg.replicas; ++r) {
        if (!ens.results[static_cast<std::size_t>(r)]) continue;
        const auto& traj = *ens.results[static_cast<std::size_t>(r)];
        for (std::size_t k = 0; k < traj.times.size(); ++k)
            for (int x = 1; x <= p.n_sites(); ++x)
                csv.row(r, traj.times[k], x, traj.snapshots[k].at(x));
        auto bytes = zrp::configuration_to_binary(traj.snapshots.back());
        std::ofstream bin(dir / "snapshots" / ("replica_" + std::to_string(r) + ".bin"),
                          std::ios::binary);
        bin.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    for (const auto& e : ens.errors) std::cerr << "error: " << e << "\n";
    std::cout << "wrote " << (dir / "trajectory.csv").string() << "\n";
    return ens.ok() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary driven zero-range process toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir, format;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--out-dir", out_dir, "output directory override");
        sub->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    const std::vector<std::string> experiments = {
        "invariance",  "oracle",         "hydrostatic", "hydrodynamic",
        "martingale",  "replacement",    "attractiveness", "pde-convergence",
        "pde-solve",   "simulate"};
    for (const auto& name : experiments) add_common(app.add_subcommand(name));

    CLI11_PARSE(app, argc, argv);
    auto* sub = app.get_subcommands().front();

    try {
        auto cfg = load_config(config_path, seed_set ? &seed : nullptr,
                               out_dir.empty() ? nullptr : &out_dir,
                               format.empty() ? nullptr : &format);
        const std::string name = sub->get_name();
        if (name == "invariance") return finish(zrp::experiment_invariance(cfg));
        if (name == "oracle") return finish(zrp::experiment_oracle(cfg));
        if (name == "hydrostatic") return finish(zrp::experiment_hydrostatic(cfg));
        if (name == "hydrodynamic") return finish(zrp::experiment_hydrodynamic(cfg));
        if (name == "martingale") return finish(zrp::experiment_martingale(cfg));
        if (name == "replacement") return finish(zrp::experiment_replacement(cfg));
        if (name == "attractiveness") return finish(zrp::experiment_attractiveness(cfg));
        if (name == "pde-convergence") return finish(zrp::experiment_pde_convergence(cfg));
        if (name == "pde-solve") return run_pde_solve(cfg);
        if (name == "simulate") return run_simulate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
