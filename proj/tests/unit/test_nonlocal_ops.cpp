#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fracobstacle/error.hpp"
#include "fracobstacle/nonlocal_ops.hpp"
#include "fracobstacle/spectral_oracle.hpp"

using namespace fracobstacle;

namespace {

OperatorParams params_1d(double s = 0.75, double sigma = 0.3) {
    OperatorParams p;
    p.s = s;
    p.sigma = sigma;
    return p;
}

FarField constant_far(double c) {
    return [c](const Point&) { return c; };
}

FarField gauss_far(double w = 1.0) {
    return [w](const Point& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * w * w)); };
}

// max over interior nodes (|x_i| <= frac * L) of |a - b| / max |b|
double interior_rel(const Field& a, const Field& b, double frac) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Point x = a.grid.node(i);
        if (std::max(std::abs(x[0]), std::abs(x[1])) > frac * a.grid.half_width) continue;
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / den;
}

Field random_smooth(const Grid& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> c(-0.4 * g.half_width, 0.4 * g.half_width);
    std::uniform_real_distribution<double> w(0.1 * g.half_width, 0.2 * g.half_width);
    std::uniform_real_distribution<double> a(-1.0, 1.0);
    const Point c1{c(rng), g.dim == 2 ? c(rng) : 0.0};
    const Point c2{c(rng), g.dim == 2 ? c(rng) : 0.0};
    const double w1 = w(rng), w2 = w(rng), a1 = a(rng), a2 = a(rng);
    return sample(g, [=](const Point& x) {
        const double r1 = std::pow(x[0] - c1[0], 2) + std::pow(x[1] - c1[1], 2);
        const double r2 = std::pow(x[0] - c2[0], 2) + std::pow(x[1] - c2[1], 2);
        return a1 * std::exp(-r1 / (2 * w1 * w1)) + a2 * std::exp(-r2 / (2 * w2 * w2));
    });
}

}  // namespace

TEST_CASE("normalization constant") {
    CHECK(normalization_constant(1, 0.5) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
    // frozen from the Gamma-function closed form evaluated independently
    CHECK(normalization_constant(2, 0.75) == doctest::Approx(0.171167129690552).epsilon(1e-13));
    CHECK(normalization_constant(1, 0.75) == doctest::Approx(0.299206710301075).epsilon(1e-13));
    CHECK_THROWS_AS(normalization_constant(3, 0.5), ConfigError);
}

TEST_CASE("second differences") {
    const Grid g = build_grid(1, 2.0, 33);
    const Field c(g, 3.0);
    const Field affine = sample(g, [](const Point& x) { return 1.0 - 2.0 * x[0]; });
    const Field quad = sample(g, [](const Point& x) { return x[0] * x[0]; });
    const auto far_affine = [](const Point& x) { return 1.0 - 2.0 * x[0]; };
    const auto far_quad = [](const Point& x) { return x[0] * x[0]; };
    for (int k : {1, 3, 20}) {
        CHECK(second_difference(c, 16, {k, 0}, constant_far(3.0)) == 0.0);
        CHECK(std::abs(second_difference(affine, 10, {k, 0}, far_affine)) < 1e-12);
        const double y = k * g.h;
        CHECK(second_difference(quad, 16, {k, 0}, far_quad) == doctest::Approx(2.0 * y * y).epsilon(1e-12));
    }
}

TEST_CASE("frac_laplacian of a constant vanishes") {
    for (int dim : {1, 2}) {
        const Grid g = build_grid(dim, 2.0, dim == 1 ? 129 : 33);
        OperatorParams p = params_1d();
        p.dim = dim;
        p.b.assign(dim, 0.0);
        const Field out = frac_laplacian(Field(g, 2.5), p, QuadratureConfig{}, constant_far(2.5));
        CHECK(out.max_abs() <= 1e-12);
    }
}

TEST_CASE("frac_laplacian of cos(kx) follows the symbol") {
    const double L = 8.0 * std::numbers::pi;
    const Grid g = build_grid(1, L, 1025);
    for (double s : {0.6, 0.75, 0.9}) {
        for (double k : {1.0, 2.0}) {
            const auto f = [k](const Point& x) { return std::cos(k * x[0]); };
            const Field u = sample(g, f);
            const Field out = frac_laplacian(u, params_1d(s, 0.3), QuadratureConfig{}, f);
            const Field expect = std::pow(k, 2.0 * s) * u;
            CAPTURE(s);
            CAPTURE(k);
            CHECK(interior_rel(out, expect, 0.5) <= 2e-2);
        }
    }
}

TEST_CASE("frac_laplacian of cos(2x) at s = 0.99 approaches the Laplacian symbol") {
    const double L = 4.0 * std::numbers::pi;
    const Grid g = build_grid(1, L, 1025);
    const auto f = [](const Point& x) { return std::cos(2.0 * x[0]); };
    const Field u = sample(g, f);
    const Field out = frac_laplacian(u, params_1d(0.99, 0.3), QuadratureConfig{}, f);
    CHECK(interior_rel(out, std::pow(2.0, 1.98) * u, 0.5) <= 2e-2);
}

TEST_CASE("frac_laplacian of cos(x0) in two dimensions") {
    const double L = 2.0 * std::numbers::pi;
    const Grid g = build_grid(2, L, 65);
    OperatorParams p = params_1d();
    p.dim = 2;
    p.b = {0.0, 0.0};
    const auto f = [](const Point& x) { return std::cos(x[0]); };
    const Field u = sample(g, f);
    const Field out = frac_laplacian(u, p, QuadratureConfig{}, f);
    CHECK(interior_rel(out, u, 0.5) <= 2e-2);
}

TEST_CASE("Gaussian against the DFT oracle and the closed form at the origin") {
    const Grid g = build_grid(1, 16.0, 513);
    const Field u = sample(g, gauss_far());
    // (-Delta)^s exp(-x^2/2) at 0 equals 2^s Gamma(s + 1/2) / sqrt(pi); values frozen from that formula
    const std::array<std::pair<double, double>, 3> at_origin{
        {{0.6, 0.813549036389839}, {0.75, 0.86003998732452}, {0.9, 0.934124647030251}}};
    for (const auto& [s, frozen] : at_origin) {
        const Field quad = frac_laplacian(u, params_1d(s, 0.3), QuadratureConfig{}, gauss_far());
        const Field oracle = from_periodic(dft_frac_laplacian(to_periodic(u), s));
        // periodic images shift the oracle by O(L^{-1-2s})
        CHECK(oracle[g.center()] == doctest::Approx(frozen).epsilon(2e-3));
        CHECK(quad[g.center()] == doctest::Approx(frozen).epsilon(2e-3));
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (std::abs(g.node(i)[0]) > 4.0) continue;
            num = std::max(num, std::abs(quad[i] - oracle[i]));
            den = std::max(den, std::abs(oracle[i]));
        }
        CHECK(num / den <= 2e-2);
    }
}

TEST_CASE("DFT oracle error at the origin shrinks with the period") {
    const auto at0 = [](double L, int n) {
        const Grid g = build_grid(1, L, n);
        return from_periodic(dft_frac_laplacian(to_periodic(sample(g, gauss_far())), 0.75))[g.center()];
    };
    const double frozen = 0.86003998732452;
    const double e16 = std::abs(at0(16.0, 513) - frozen);
    const double e64 = std::abs(at0(64.0, 2049) - frozen);
    CHECK(e64 < 0.25 * e16);
}

TEST_CASE("consistency order on cos(kx)") {
    const double L = 4.0 * std::numbers::pi;
    const auto f = [](const Point& x) { return std::cos(3.0 * x[0]); };
    double prev = 0.0;
    for (int n : {129, 257}) {
        const Grid g = build_grid(1, L, n);
        const Field u = sample(g, f);
        const Field out = frac_laplacian(u, params_1d(), QuadratureConfig{}, f);
        const double err = interior_rel(out, std::pow(3.0, 1.5) * u, 0.5);
        if (prev > 0.0) CHECK(prev / err >= 2.0);
        prev = err;
    }
}

TEST_CASE("frac_laplacian rejects non-finite input") {
    const Grid g = build_grid(1, 1.0, 17);
    Field u(g);
    u[3] = std::nan("");
    CHECK_THROWS_AS(frac_laplacian(u, params_1d(), QuadratureConfig{}, constant_far(0.0)), NumericalError);
}

TEST_CASE("fractional kernel reproduces -(-Delta)^sigma") {
    const double L = 8.0 * std::numbers::pi;
    const Grid g = build_grid(1, L, 1025);
    const auto f = [](const Point& x) { return std::cos(2.0 * x[0]); };
    const Field u = sample(g, f);
    const double sigma = 0.3;
    const Field out = kernel_operator(u, KernelSpec::fractional(1, sigma), QuadratureConfig{}, f);
    CHECK(interior_rel(out, -std::pow(2.0, 2.0 * sigma) * u, 0.5) <= 2e-2);
    const Field zero = kernel_operator(Field(g, 1.0), KernelSpec::constant(sigma, 1.0), QuadratureConfig{}, constant_far(1.0));
    CHECK(zero.max_abs() <= 1e-12);
}

TEST_CASE("pucci operators") {
    const Grid g = build_grid(1, 2.0, 129);
    OperatorParams p = params_1d();
    p.lambda = 0.5;
    p.Lambda = 2.0;
    SUBCASE("constant field") {
        for (int sign : {-1, 1}) CHECK(pucci(Field(g, 4.0), p, sign, QuadratureConfig{}, constant_far(4.0)).max_abs() <= 1e-12);
    }
    SUBCASE("antisymmetry") {
        std::mt19937_64 rng(3);
        const Field u = random_smooth(g, rng);
        const Field plus_neg = pucci(-1.0 * u, p, +1, QuadratureConfig{}, constant_far(0.0));
        const Field minus = pucci(u, p, -1, QuadratureConfig{}, constant_far(0.0));
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(plus_neg[i] == doctest::Approx(-minus[i]).epsilon(1e-12));
    }
    SUBCASE("sign-definite second differences") {
        const auto f = [](const Point& x) { return x[0] * x[0]; };
        const Field u = sample(g, f);
        const Field i0 = kernel_operator(u, KernelSpec::constant(p.sigma, 1.0), QuadratureConfig{}, f);
        const Field mp = pucci(u, p, +1, QuadratureConfig{}, f);
        const Field mm = pucci(u, p, -1, QuadratureConfig{}, f);
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(mp[i] == doctest::Approx(2.0 * i0[i]).epsilon(1e-12));
            CHECK(mm[i] == doctest::Approx(0.5 * i0[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("i_apply variants") {
    const Grid g = build_grid(1, 2.0, 129);
    std::mt19937_64 rng(5);
    const Field u = random_smooth(g, rng);
    OperatorParams p = params_1d();
    p.lambda = 0.5;
    p.Lambda = 2.0;

    p.i_variant = IVariantKind::zero;
    CHECK(i_apply(u, p, QuadratureConfig{}, constant_far(0.0)).max_abs() == 0.0);

    const KernelSpec k1 = KernelSpec::constant(0.3, 1.0);
    const KernelSpec k2 = KernelSpec::oscillating(0.3, 0.5, 2.0, 4.0, 0.3);
    p.i_variant = IVariantKind::pucci_sup;
    p.kernels = {k1, k2};
    const Field sup = i_apply(u, p, QuadratureConfig{}, constant_far(0.0));
    for (const auto& k : p.kernels) {
        const Field lk = kernel_operator(u, k, QuadratureConfig{}, constant_far(0.0));
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(sup[i] >= lk[i] - 1e-14);
    }

    for (auto kind : {IVariantKind::zero, IVariantKind::linear, IVariantKind::pucci_sup, IVariantKind::g_integrand}) {
        OperatorParams q = p;
        q.i_variant = kind;
        if (kind == IVariantKind::linear) q.kernels = {k1};
        if (kind == IVariantKind::g_integrand) q.sigma = 0.3;
        CHECK(i_apply(Field(g), q, QuadratureConfig{}, constant_far(0.0)).max_abs() == 0.0);
    }

    OperatorParams bad = params_1d(0.75, 0.6);
    bad.i_variant = IVariantKind::g_integrand;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("kernel outside the envelope is rejected") {
    const Grid g = build_grid(1, 2.0, 65);
    OperatorParams p = params_1d();
    p.lambda = 0.5;
    p.Lambda = 2.0;
    p.i_variant = IVariantKind::linear;
    KernelSpec k = KernelSpec::constant(0.3, 1.0);
    k.profile = [](const Point& y) { return std::abs(y[0]) > 1.0 ? 3.0 : 1.0; };
    p.kernels = {k};
    CHECK_THROWS_AS(OperatorSet(g, p, QuadratureConfig{}, constant_far(0.0)), ConfigError);
}

TEST_CASE("gradient") {
    const Grid g = build_grid(1, 1.28, 257);
    CHECK(gradient(Field(g, 2.0), constant_far(2.0))[0].max_abs() == 0.0);
    const auto affine = [](const Point& x) { return 0.5 - 3.0 * x[0]; };
    const auto ga = gradient(sample(g, affine), affine)[0];
    for (double v : ga.values) CHECK(v == doctest::Approx(-3.0).epsilon(1e-12));
    const auto sine = [](const Point& x) { return std::sin(x[0]); };
    const Grid fine = build_grid(1, 1.28, 257);
    CHECK(fine.h == doctest::Approx(0.01));
    const auto gs = gradient(sample(fine, sine), sine)[0];
    CHECK(std::abs(gs[fine.center()] - 1.0) <= 2e-5);
}

TEST_CASE("lower-order operator") {
    const Grid g = build_grid(1, 2.0, 65);
    OperatorParams p = params_1d();
    std::mt19937_64 rng(1);
    const Field u = random_smooth(g, rng);
    CHECK(lower_order_apply(u, p, QuadratureConfig{}, constant_far(0.0)).max_abs() == 0.0);
    p.b = {0.7};
    p.r = 0.05;
    const Field out = lower_order_apply(Field(g, 2.0), p, QuadratureConfig{}, constant_far(2.0));
    for (double v : out.values) CHECK(v == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("sandwich checks") {
    const Grid g = build_grid(1, 2.0, 129);
    std::mt19937_64 rng(11);
    SUBCASE("u = v") {
        OperatorParams p = params_1d();
        p.i_variant = IVariantKind::linear;
        p.kernels = {KernelSpec::constant(0.3, 1.0)};
        const Field u = random_smooth(g, rng);
        const auto rep = sandwich_check(u, u, p, QuadratureConfig{}, constant_far(0.0));
        CHECK(rep.lower_violation == 0.0);
        CHECK(rep.upper_violation == 0.0);
    }
    SUBCASE("linear variant with lambda = Lambda collapses the envelope") {
        OperatorParams p = params_1d();
        p.lambda = p.Lambda = 1.5;
        p.i_variant = IVariantKind::linear;
        p.kernels = {KernelSpec::constant(0.3, 1.5)};
        const Field u = random_smooth(g, rng);
        const Field v = random_smooth(g, rng);
        const auto rep = sandwich_check(u, v, p, QuadratureConfig{}, constant_far(0.0));
        CHECK(std::abs(rep.lower_violation) <= 1e-12);
        CHECK(std::abs(rep.upper_violation) <= 1e-12);
    }
    SUBCASE("pucci_sup over a random three-kernel family") {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 5; ++trial) {
            OperatorParams p = params_1d();
            p.lambda = 0.5;
            p.Lambda = 2.0;
            p.i_variant = IVariantKind::pucci_sup;
            p.kernels = {KernelSpec::constant(0.3, 0.5 + 1.5 * unit(rng)),
                         KernelSpec::oscillating(0.3, 0.5, 2.0, 1.0 + 5.0 * unit(rng), 6.0 * unit(rng)),
                         KernelSpec::oscillating(0.3, 0.5 + unit(rng), 2.0, 0.5 + unit(rng), 0.0)};
            const Field u = random_smooth(g, rng);
            const Field v = random_smooth(g, rng);
            CHECK(sandwich_check(u, v, p, QuadratureConfig{}, constant_far(0.0)).worst() <= 1e-8);
        }
    }
}

TEST_CASE("extremal bounds hold for every admissible kernel") {
    const Grid g = build_grid(2, 2.0, 33);
    OperatorParams p = params_1d();
    p.dim = 2;
    p.b = {0.0, 0.0};
    p.lambda = 0.5;
    p.Lambda = 2.0;
    std::mt19937_64 rng(2);
    const Field u = random_smooth(g, rng);
    const Field mp = pucci(u, p, +1, QuadratureConfig{}, constant_far(0.0));
    const Field mm = pucci(u, p, -1, QuadratureConfig{}, constant_far(0.0));
    for (const auto& k : {KernelSpec::constant(0.3, 0.5), KernelSpec::constant(0.3, 2.0),
                          KernelSpec::oscillating(0.3, 0.5, 2.0, 3.0, 1.0), KernelSpec::anisotropic(0.3, 0.5, 2.0, 0.4)}) {
        const Field lk = kernel_operator(u, k, QuadratureConfig{}, constant_far(0.0));
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(lk[i] <= mp[i] + 1e-10);
            CHECK(lk[i] >= mm[i] - 1e-10);
        }
    }
}

TEST_CASE("translation, symmetry and scaling") {
    const Grid g = build_grid(1, 4.0, 257);
    const OperatorSet ops(g, params_1d(), QuadratureConfig{}, constant_far(0.0));
    const auto bump = [](double c) {
        return [c](const Point& x) { return std::exp(-std::pow(x[0] - c, 2) / 0.08); };
    };
    const Field u0 = sample(g, bump(0.0));
    const Field u1 = sample(g, bump(g.h));
    const Field a0 = ops.frac_laplacian(u0);
    const Field a1 = ops.frac_laplacian(u1);
    for (std::size_t i = 64; i + 64 < g.size(); ++i) CHECK(std::abs(a1[i + 1] - a0[i]) <= 1e-10);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(a0[i] == a0[g.size() - 1 - i]);
    const Field scaled = ops.frac_laplacian(3.0 * u0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(scaled[i] - 3.0 * a0[i]) <= 1e-13 * a0.max_abs());
}

TEST_CASE("operator validation names the violated assumption") {
    OperatorParams p = params_1d(0.75, 0.8);
    try {
        p.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("0 < sigma < s") != std::string::npos);
    }
    CHECK_THROWS_AS(params_1d(0.4, 0.3).validate(), ConfigError);
}
