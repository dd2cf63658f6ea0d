#include <doctest.h>

#include <cmath>

#include "fracobstacle/error.hpp"
#include "fracobstacle/regularity.hpp"

using namespace fracobstacle;

namespace {

Trajectory trajectory_of(const Grid& g, int snapshots, double dt, const std::function<double(double, const Point&)>& f) {
    Trajectory traj;
    traj.dt = dt;
    for (int k = 0; k < snapshots; ++k) {
        const double t = k * dt;
        traj.push(t, sample(g, [&](const Point& x) { return f(t, x); }));
    }
    return traj;
}

}  // namespace

TEST_CASE("contact set and tolerances") {
    const Grid g = build_grid(1, 1.0, 17);
    const Field psi(g);
    const Field u = sample(g, [](const Point& x) { return std::max(x[0], 0.0); });
    const ContactMask m = contact_set(u, psi, 0.0);
    CHECK(m.count() == 9);
    CHECK(contact_set(u, psi, 0.25).count() == 11);
    CHECK(contact_set(psi, psi, 0.0).full());
    CHECK(contact_set(Field(g, 1.0), psi, 0.5).empty());
    CHECK_THROWS_AS(contact_set(u, psi, -1.0), ConfigError);
    CHECK_THROWS_AS(contact_set(u, Field(build_grid(1, 1.0, 33)), 0.0), ConfigError);

    CHECK(penalized_contact_tol(0.1) == doctest::Approx(1.0));
    CHECK(projected_contact_tol(g, 0.75) == doctest::Approx(std::pow(0.125, 1.75)).epsilon(1e-14));
}

TEST_CASE("free boundary") {
    SUBCASE("half line") {
        const Grid g = build_grid(1, 1.0, 17);
        const Field u = sample(g, [](const Point& x) { return std::max(x[0], 0.0); });
        const ContactMask m = contact_set(u, Field(g), 0.0);
        const FreeBoundary fb = free_boundary(m);
        REQUIRE(fb.nodes.size() == 1);
        CHECK(fb.nodes[0] == g.center());
        CHECK_FALSE(fb.degenerate);
        CHECK(probe_point(m) == g.center());
    }
    SUBCASE("disk") {
        const Grid g = build_grid(2, 1.0, 65);
        const double R = 0.5;
        const Field u = sample(g, [&](const Point& x) { return std::hypot(x[0], x[1]) <= R ? 0.0 : 1.0; });
        const FreeBoundary fb = free_boundary(contact_set(u, Field(g), 0.0));
        CHECK(fb.nodes.size() > 8);
        for (std::size_t i : fb.nodes) {
            const double r = std::hypot(g.node(i)[0], g.node(i)[1]);
            CHECK(r <= R);
            CHECK(r > R - g.h);
        }
        CHECK_FALSE(fb.degenerate);
    }
    SUBCASE("checkerboard is degenerate") {
        const Grid g = build_grid(2, 1.0, 17);
        Field u(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto mi = g.multi_index(i);
            u[i] = (mi[0] + mi[1]) % 2 == 0 ? 0.0 : 1.0;
        }
        CHECK(free_boundary(contact_set(u, Field(g), 0.0)).degenerate);
    }
    SUBCASE("empty and full masks") {
        const Grid g = build_grid(1, 1.0, 17);
        CHECK_THROWS_AS(free_boundary(contact_set(Field(g), Field(g), 0.0)), ConfigError);
        CHECK_THROWS_AS(free_boundary(contact_set(Field(g, 1.0), Field(g), 0.0)), ConfigError);
    }
}

TEST_CASE("power-law fit") {
    std::vector<double> x;
    std::vector<double> y;
    for (double r = 1.0; r > 1e-3; r *= 0.5) {
        x.push_back(r);
        y.push_back(3.0 * std::pow(r, 1.75));
    }
    const ExponentFit fit = fit_power_law(x, y);
    CHECK(fit.kappa == doctest::Approx(1.75).epsilon(1e-12));
    CHECK(fit.band <= 1e-12);
    CHECK_FALSE(fit.range().empty());
    CHECK_THROWS_AS(fit_power_law({1.0}, {1.0}), ConfigError);
    CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0, -1.0}), NumericalError);

    const auto radii = dyadic_radii(0.1, 1.0);
    CHECK(radii == std::vector<double>{1.0, 0.5, 0.25, 0.125});
}

TEST_CASE("decay exponent of a synthetic one-sided power") {
    for (double kappa : {1.5, 1.75}) {
        const Grid g = build_grid(1, 2.0, 513);
        const Field u = sample(g, [&](const Point& x) { return std::pow(std::max(x[0], 0.0), kappa); });
        const ExponentFit fit = decay_exponent(u, Field(g), g.center(), dyadic_radii(8.0 * g.h, 0.5));
        CHECK(fit.kappa == doctest::Approx(kappa).epsilon(1e-10));
        CHECK(fit.band <= 1e-10);
    }
    const Grid g = build_grid(1, 2.0, 513);
    const Field u(g, 1.0);
    CHECK_THROWS_AS(decay_exponent(u, Field(g), g.center(), {1.0}), ConfigError);
    CHECK_THROWS_AS(decay_exponent(u, Field(g), g.center(), {2.0 * g.h}), ConfigError);
    CHECK_THROWS_AS(decay_exponent(Field(g), Field(g), g.center(), dyadic_radii(8.0 * g.h, 0.5)), ConfigError);
}

TEST_CASE("decay exponent in 2-D of a radial power") {
    const Grid g = build_grid(2, 2.0, 513);
    const Field u = sample(g, [](const Point& x) { return std::pow(std::hypot(x[0], x[1]), 1.5); });
    const ExponentFit fit = decay_exponent(u, Field(g), g.center(), dyadic_radii(8.0 * g.h, 0.5));
    CHECK(fit.kappa == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("holder seminorm") {
    const Grid g = build_grid(1, 1.0, 129);
    const Field line = sample(g, [](const Point& x) { return 3.0 * x[0]; });
    CHECK(holder_seminorm(line, 1.0, 0.5) == doctest::Approx(3.0).epsilon(1e-12));
    const Field root = sample(g, [](const Point& x) { return std::sqrt(std::abs(x[0])); });
    CHECK(holder_seminorm(root, 0.5, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
    // the window limits the pairs: |x|^{1/2} is not Lipschitz but a short window bounds the quotient
    CHECK(holder_seminorm(root, 1.0, g.h) == doctest::Approx(1.0 / std::sqrt(g.h)).epsilon(1e-12));
    CHECK_THROWS_AS(holder_seminorm(root, 0.0, 0.5), ConfigError);
    CHECK_THROWS_AS(holder_seminorm(root, 0.5, 0.0), ConfigError);

    const Grid g2 = build_grid(2, 1.0, 33);
    const Field plane = sample(g2, [](const Point& x) { return x[0] + x[1]; });
    CHECK(holder_seminorm(plane, 1.0, 0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("time exponent of synthetic trajectories") {
    const Grid g = build_grid(1, 1.0, 17);
    const std::size_t node = g.center();
    const Trajectory a = trajectory_of(g, 129, 1.0 / 128, [](double t, const Point&) { return std::pow(t, 0.3); });
    CHECK(time_exponent(a, node, TimeSelector::u).kappa == doctest::Approx(0.3).epsilon(1e-10));

    // derivative (t - 1/2)_+^{0.3}, onset away from the ends of the record
    const Trajectory b = trajectory_of(g, 129, 1.0 / 128, [](double t, const Point&) {
        return std::pow(std::max(t - 0.5, 0.0), 1.3) / 1.3;
    });
    CHECK(time_exponent(b, node, TimeSelector::dt_u).kappa == doctest::Approx(0.3).epsilon(0.15));

    const Trajectory flat = trajectory_of(g, 33, 0.1, [](double, const Point&) { return 1.0; });
    CHECK_THROWS_AS(time_exponent(flat, node, TimeSelector::u), NumericalError);
    const Trajectory short_run = trajectory_of(g, 8, 0.1, [](double t, const Point&) { return t; });
    CHECK_THROWS_AS(time_exponent(short_run, node, TimeSelector::u), ConfigError);
    CHECK_THROWS_AS(time_exponent(a, node, TimeSelector::fraclap_u), ConfigError);
    CHECK(time_selector_from_string("dt_u") == TimeSelector::dt_u);
    CHECK_THROWS_AS(time_selector_from_string("dx"), ConfigError);
}

TEST_CASE("time derivative is exact on quadratics") {
    const Grid g = build_grid(1, 1.0, 17);
    const Trajectory traj = trajectory_of(g, 11, 0.1, [](double t, const Point& x) { return t * t + x[0]; });
    const Trajectory d = time_derivative(traj);
    for (std::size_t k = 1; k + 1 < d.size(); ++k) {
        for (double v : d.fields[k].values) CHECK(v == doctest::Approx(2.0 * traj.times[k]).epsilon(1e-12));
    }
}

TEST_CASE("semiconvexity constant") {
    const Grid g = build_grid(2, 1.0, 33);
    CHECK(semiconvexity_constant(sample(g, [](const Point& x) { return -x[0] * x[0] + 0.5 * x[1] * x[1]; })) ==
          doctest::Approx(2.0).epsilon(1e-10));
    CHECK(semiconvexity_constant(sample(g, [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; })) == 0.0);
    CHECK(semiconvexity_constant(sample(g, [](const Point& x) { return std::abs(x[0]); })) == 0.0);
}

TEST_CASE("monotone in time and contact nesting") {
    const Grid g = build_grid(1, 1.0, 33);
    const Field psi(g);
    // contact region {x <= -t} shrinks
    const Trajectory grow =
        trajectory_of(g, 9, 0.1, [](double t, const Point& x) { return std::max(0.0, x[0] + t); });
    const MonotonicityCheck mc = monotone_in_time_check(grow, 0.0);
    CHECK(mc.pass);
    CHECK(mc.worst == 0.0);
    CHECK(contact_nesting_check(grow, psi, 0.0).worst_fraction == 0.0);

    const Trajectory shrink =
        trajectory_of(g, 9, 0.1, [](double t, const Point& x) { return std::max(0.0, x[0] - t); });
    const MonotonicityCheck bad = monotone_in_time_check(shrink, 1e-3);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst == doctest::Approx(-0.1).epsilon(1e-12));
    const NestingCheck nc = contact_nesting_check(shrink, psi, 0.0);
    // a shift of 0.1 = 1.6 h per step adds one or two nodes
    CHECK(nc.worst_fraction >= 1.0 / 33.0);
    CHECK(nc.worst_fraction <= 2.0 / 33.0);
    CHECK(nc.worst_step >= 1);
}

TEST_CASE("sign structure") {
    const Grid g = build_grid(1, 4.0, 129);
    OperatorParams op;
    const FarField zero = [](const Point&) { return 0.0; };
    const OperatorSet ops(g, op, QuadratureConfig{}, zero);
    const Field u = sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    const Field lap = ops.frac_laplacian(u);

    const ContactMask all = contact_set(u, u, 0.0);
    const SignStructure s = sign_structure_check(u, all, ops, 0.0);
    std::size_t negative = 0;
    for (double v : lap.values) negative += v < 0.0;
    CHECK(s.contact_nodes == g.size());
    CHECK(s.free_nodes == 0);
    CHECK(s.contact_violation == doctest::Approx(static_cast<double>(negative) / g.size()));
    CHECK(s.free_violation == 0.0);
    CHECK(sign_structure_scale(u, ops) == doctest::Approx(lap.max_abs()).epsilon(1e-14));

    const SignStructure loose = sign_structure_check(u, all, ops, 2.0 * lap.max_abs());
    CHECK(loose.contact_violation == 0.0);

    const SignStructure zero_field = sign_structure_check(Field(g), contact_set(Field(g), u, 0.0), ops, 0.0);
    CHECK(zero_field.contact_violation == 0.0);
    CHECK(zero_field.free_violation == 0.0);
}

TEST_CASE("exponent ladder") {
    for (double s : {0.6, 0.75, 0.9}) {
        const Ladder l = exponent_ladder(s, 0.5 * (1.0 - s) / (2.0 * s), 80);
        CHECK(l.fixed_point == doctest::Approx((1.0 - s) / (2.0 * s)).epsilon(1e-15));
        CHECK(l.ratio == doctest::Approx((1.0 - s) / (1.0 + s)).epsilon(1e-15));
        CHECK(std::abs(l.alphas.back() - l.fixed_point) <= 1e-14);
        for (std::size_t j = 0; j + 2 < l.alphas.size(); ++j) {
            const double e0 = l.fixed_point - l.alphas[j];
            const double e1 = l.fixed_point - l.alphas[j + 1];
            CHECK(e1 >= -1e-16);
            if (e0 > 1e-3) CHECK(e1 / e0 == doctest::Approx(l.ratio).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(exponent_ladder(0.75, 0.5, 10), ConfigError);
    CHECK_THROWS_AS(exponent_ladder(1.0, 0.1, 10), ConfigError);
}

TEST_CASE("auxiliary constants") {
    const AuxConstants c = aux_constants(0.75, 0.3, 0.2, 1);
    CHECK(c.a == doctest::Approx(-0.5));
    CHECK(c.gamma == doctest::Approx(0.25));
    CHECK(c.delta == doctest::Approx(0.25 * (0.2 / 1.7 - 0.1)));
    CHECK(c.eta == doctest::Approx(0.5));
    CHECK(aux_constants(0.75, 0.6, 0.2, 2).gamma == doctest::Approx(0.15));
    CHECK_THROWS_AS(aux_constants(0.5, 0.3, 0.2, 1), ConfigError);
    CHECK_THROWS_AS(aux_constants(0.75, 0.75, 0.2, 1), ConfigError);
    CHECK_THROWS_AS(aux_constants(0.75, 0.3, 1.2, 1), ConfigError);
}

TEST_CASE("lipschitz bounds") {
    const Grid g = build_grid(2, 1.0, 17);
    const Trajectory traj = trajectory_of(g, 5, 0.25, [](double t, const Point& x) { return t - 2.0 * x[0] + x[1]; });
    const LipschitzBounds b = lipschitz_bounds(traj);
    CHECK(b.sup_dt == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.sup_grad == doctest::Approx(2.0).epsilon(1e-12));
}
