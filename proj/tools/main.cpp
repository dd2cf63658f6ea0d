#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fracobstacle/config.hpp"
#include "fracobstacle/error.hpp"
#include "fracobstacle/runner.hpp"

namespace fo = fracobstacle;

namespace {

void apply_thread_cap() {
    const char* env = std::getenv("FRACOBSTACLE_THREADS");
    if (!env) return;
    const int n = std::atoi(env);
    if (n < 1) throw fo::ConfigError("FRACOBSTACLE_THREADS must be a positive integer");
#ifdef _OPENMP
    omp_set_num_threads(n);
#endif
}

struct SolveOverrides {
    std::optional<std::string> scheme;
    std::optional<double> eps;
    std::optional<double> dt;
    std::optional<double> T;
    std::optional<int> snapshot_every;

    void apply(fo::RunConfig& c) const {
        if (scheme) c.solver.scheme = fo::scheme_from_string(*scheme);
        if (eps) c.solver.eps = *eps;
        if (dt) c.solver.dt = *dt;
        if (T) c.solver.T = *T;
        if (snapshot_every) c.solver.snapshot_every = *snapshot_every;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalized fractional obstacle problems: solver, extension diagnostics and oracles"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    auto common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config_path, "configuration file (YAML)");
        if (needs_config) opt->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "seed for randomized property checks");
    };

    auto* validate = app.add_subcommand("validate-ops", "operator checks against the DFT oracle and the sandwich bound");
    common(validate, true);

    SolveOverrides ov;
    auto* solve = app.add_subcommand("solve", "time integration; writes trajectory.csv and report.txt");
    common(solve, true);
    solve->add_option("--scheme", ov.scheme, "imex, projected or picard")
        ->check(CLI::IsMember({"imex", "projected", "picard"}));
    solve->add_option("--eps", ov.eps, "penalty parameter");
    solve->add_option("--dt", ov.dt, "time step");
    solve->add_option("--T", ov.T, "horizon");
    solve->add_option("--snapshot-every", ov.snapshot_every, "steps between stored snapshots");

    std::string trajectory;
    auto* analyze = app.add_subcommand("analyze", "regularity diagnostics of a trajectory CSV");
    common(analyze, true);
    analyze->add_option("--trajectory", trajectory, "trajectory CSV written by solve")->required();
    analyze->add_option("--scheme", ov.scheme, "scheme that produced the trajectory")
        ->check(CLI::IsMember({"imex", "projected", "picard"}));
    analyze->add_option("--eps", ov.eps, "penalty parameter of the trajectory");
    analyze->add_option("--dt", ov.dt, "time step of the trajectory");
    analyze->add_option("--T", ov.T, "horizon of the trajectory");

    auto* extend = app.add_subcommand("extend", "extension, w field and monotonicity quantity of a solved slice");
    common(extend, true);

    std::vector<double> eig_s{0.6, 0.75, 0.9};
    int eig_res = 256;
    auto* eig = app.add_subcommand("eigcheck", "half-sphere Rayleigh quotient against (1-s)(1+s)");
    common(eig, false);
    eig->add_option("--s", eig_s, "values of s");
    eig->add_option("--resolution", eig_res, "angular resolution");

    std::string check;
    auto* oracle = app.add_subcommand("oracle", "spectral oracle error tables");
    common(oracle, false);
    oracle->add_option("--check", check, "symbol, heat or duhamel")
        ->required()
        ->check(CLI::IsMember({"symbol", "heat", "duhamel"}));

    auto* sweep = app.add_subcommand("sweep", "penalty sweep against the projected solution");
    common(sweep, true);

    auto* runall = app.add_subcommand("run", "solve, analyze and the enabled diagnostics");
    common(runall, true);
    runall->add_option("--scheme", ov.scheme, "imex, projected or picard")
        ->check(CLI::IsMember({"imex", "projected", "picard"}));
    runall->add_option("--eps", ov.eps, "penalty parameter");
    runall->add_option("--dt", ov.dt, "time step");
    runall->add_option("--T", ov.T, "horizon");
    runall->add_option("--snapshot-every", ov.snapshot_every, "steps between stored snapshots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        apply_thread_cap();
        auto load = [&] {
            fo::RunConfig c = fo::load_config(config_path);
            ov.apply(c);
            if (seed) c.seed = *seed;
            if (out_dir.empty()) out_dir = c.output_dir;
            c.validate();
            return c;
        };
        if (out_dir.empty() && config_path.empty()) out_dir = "out";
        std::ostream& log = std::cout;
        if (*validate) return fo::command_validate_ops(load(), out_dir, log);
        if (*solve) return fo::command_solve(load(), out_dir, log);
        if (*analyze) return fo::command_analyze(load(), trajectory, out_dir, log);
        if (*extend) return fo::command_extend(load(), out_dir, log);
        if (*eig) return fo::command_eigcheck(eig_s, eig_res, out_dir, log);
        if (*oracle) return fo::command_oracle(check, out_dir, log);
        if (*sweep) return fo::command_sweep(load(), out_dir, log);
        if (*runall) return fo::run(load(), out_dir, log);
    } catch (const fo::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const fo::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
