#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "fracobstacle/error.hpp"
#include "fracobstacle/runner.hpp"

using namespace fracobstacle;

namespace {

Trajectory small_trajectory(int dim) {
    const Grid g = build_grid(dim, 1.0, 17);
    Trajectory traj;
    traj.dt = 0.125;
    for (int k = 0; k < 5; ++k) {
        const double t = k * traj.dt;
        traj.push(t, sample(g, [t](const Point& x) { return std::sin(x[0] + t) / 3.0 + x[1] * t; }));
    }
    return traj;
}

}  // namespace

TEST_CASE("trajectory csv round trip") {
    for (int dim : {1, 2}) {
        const Trajectory traj = small_trajectory(dim);
        std::stringstream ss;
        write_trajectory_csv(ss, traj);
        std::string header;
        std::getline(ss, header);
        CHECK(header == (dim == 1 ? "t,x,value" : "t,x0,x1,value"));
        ss.seekg(0);
        const Trajectory back = read_trajectory_csv(ss);
        REQUIRE(back.size() == traj.size());
        CHECK(back.grid() == traj.grid());
        CHECK(back.dt == doctest::Approx(traj.dt).epsilon(1e-15));
        for (std::size_t k = 0; k < traj.size(); ++k) {
            CHECK(back.times[k] == traj.times[k]);
            CHECK(back.fields[k].values == traj.fields[k].values);
        }
    }
}

TEST_CASE("report csv and exit status") {
    std::vector<Diagnostic> rows{{"alpha", 0.5, "<= 1", "", true, true},
                                 {"beta", 3.0, "<= 1", "[0.1;1]", false, false}};
    std::stringstream ss;
    write_report_csv(ss, rows);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "quantity,value,band,range_used,pass");
    std::getline(ss, line);
    CHECK(line.rfind("alpha,0.5,", 0) == 0);
    std::getline(ss, line);
    CHECK(line.find("[0.1;1]") != std::string::npos);
    CHECK(all_enforced_pass(rows));
    rows[0].pass = false;
    CHECK_FALSE(all_enforced_pass(rows));
}

TEST_CASE("analysis helpers") {
    const Trajectory traj = small_trajectory(1);
    CHECK(slice_index(traj, 0.5) == 2);
    CHECK(slice_index(traj, 1.0) == 4);

    const Grid g = build_grid(1, 2.0, 257);
    const auto radii = decay_radii(g);
    CHECK(radii.front() == doctest::Approx(0.5));
    CHECK(radii.back() >= 8.0 * g.h * (1 - 1e-12));

    // contact on x <= 0: the continuation side is x > 0
    const Field u = sample(g, [](const Point& x) { return std::max(x[0], 0.0); });
    const ContactMask mask = contact_set(u, Field(g), 0.0);
    const std::size_t probe = probe_point(mask);
    CHECK(continuation_node(mask, probe, 2) == probe + 2);

    Problem p;
    p.grid = g;
    PenaltyConfig cfg;
    cfg.eps = 0.05;
    CHECK(contact_tolerance(p, cfg) == doctest::Approx(0.5));
    cfg.scheme = Scheme::projected;
    CHECK(contact_tolerance(p, cfg) == doctest::Approx(std::pow(g.h, 1.75)));
}

TEST_CASE("studies are deterministic") {
    Problem p;
    p.grid = build_grid(1, 2.0, 65);
    p.params.i_variant = IVariantKind::pucci_sup;
    p.params.lambda = 0.5;
    p.params.Lambda = 2.0;
    p.params.kernels = {KernelSpec::constant(0.3, 1.0), KernelSpec::oscillating(0.3, 0.5, 2.0, 3.0, 0.0)};
    const SandwichStudy a = sandwich_study(p, 5, 42);
    const SandwichStudy b = sandwich_study(p, 5, 42);
    CHECK(a.pairs == 5);
    CHECK(a.worst == b.worst);
    CHECK(a.worst <= 1e-8);

    const SymbolStudy s1 = symbol_study(0.75, 129, 16.0, QuadratureConfig{});
    const SymbolStudy s2 = symbol_study(0.75, 129, 16.0, QuadratureConfig{});
    CHECK(s1.rel_linf == s2.rel_linf);
    CHECK(s1.rel_linf < 0.1);
}

TEST_CASE("penalty sweep on a small problem") {
    Problem p;
    p.grid = build_grid(1, 2.0, 65);
    PenaltyConfig base;
    base.T = 0.1;
    const PenaltySweep sweep = penalty_sweep(p, base, {0.1, 0.05});
    REQUIRE(sweep.entries.size() == 2);
    CHECK(sweep.psi_norm == doctest::Approx(1.0));
    CHECK(sweep.entries[1].distance < sweep.entries[0].distance);
    for (const auto& e : sweep.entries) CHECK(std::isfinite(e.max_beta));
}
