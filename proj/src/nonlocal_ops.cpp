#include "fracobstacle/nonlocal_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracobstacle/error.hpp"

namespace fracobstacle {

double normalization_constant(int dim, double s) {
    if (dim < 1 || dim > 2) throw ConfigError("normalization_constant: dim must be 1 or 2");
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("normalization_constant: s must lie in (0, 1)");
    const double d = dim;
    return std::pow(4.0, s) * std::tgamma(0.5 * d + s) /
           (std::pow(std::numbers::pi, 0.5 * d) * std::abs(std::tgamma(-s)));
}

double second_difference(const Field& u, std::size_t i, std::array<int, 2> offset, const FarField& far) {
    const Grid& g = u.grid;
    const auto mi = g.multi_index(i);
    auto at = [&](int sgn) {
        const int j0 = mi[0] + sgn * offset[0];
        const int j1 = g.dim == 2 ? mi[1] + sgn * offset[1] : 0;
        if (g.contains_index(j0, j1)) return u[g.flat_index(j0, j1)];
        if (!far) return 0.0;
        return far({g.coord(j0), g.dim == 2 ? g.coord(j1) : 0.0});
    };
    return at(1) + at(-1) - 2.0 * u[i];
}

KernelSpec KernelSpec::constant(double sigma, double c) {
    KernelSpec k;
    k.name = "constant";
    k.sigma = sigma;
    k.lambda = k.Lambda = c;
    k.profile = [c](const Point&) { return c; };
    return k;
}

KernelSpec KernelSpec::fractional(int dim, double sigma) {
    KernelSpec k = constant(sigma, 0.5 * normalization_constant(dim, sigma));
    k.name = "fractional";
    return k;
}

KernelSpec KernelSpec::oscillating(double sigma, double lambda, double Lambda, double freq, double phase) {
    KernelSpec k;
    k.name = "oscillating";
    k.sigma = sigma;
    k.lambda = lambda;
    k.Lambda = Lambda;
    k.profile = [=](const Point& y) {
        return lambda + (Lambda - lambda) * 0.5 * (1.0 + std::sin(freq * std::hypot(y[0], y[1]) + phase));
    };
    return k;
}

KernelSpec KernelSpec::anisotropic(double sigma, double lambda, double Lambda, double angle) {
    KernelSpec k;
    k.name = "anisotropic";
    k.sigma = sigma;
    k.lambda = lambda;
    k.Lambda = Lambda;
    const double e0 = std::cos(angle);
    const double e1 = std::sin(angle);
    k.profile = [=](const Point& y) {
        const double r2 = y[0] * y[0] + y[1] * y[1];
        if (r2 == 0.0) return lambda;
        const double p = y[0] * e0 + y[1] * e1;
        return lambda + (Lambda - lambda) * p * p / r2;
    };
    return k;
}

double KernelSpec::value(const Point& y, int dim) const {
    const double rho = std::hypot(y[0], y[1]);
    return profile(y) * std::pow(rho, -dim - 2.0 * sigma);
}

std::string to_string(IVariantKind kind) {
    switch (kind) {
        case IVariantKind::zero: return "zero";
        case IVariantKind::linear: return "linear";
        case IVariantKind::pucci_sup: return "pucci_sup";
        case IVariantKind::g_integrand: return "g_integrand";
    }
    return "zero";
}

IVariantKind i_variant_from_string(const std::string& name) {
    if (name == "zero") return IVariantKind::zero;
    if (name == "linear") return IVariantKind::linear;
    if (name == "pucci_sup") return IVariantKind::pucci_sup;
    if (name == "g_integrand") return IVariantKind::g_integrand;
    throw ConfigError("unknown i_variant '" + name + "'");
}

double OperatorParams::gamma() const noexcept { return s - std::max(sigma, 0.5); }

void OperatorParams::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (dim < 1 || dim > 2) fail("operator: dim must be 1 or 2");
    if (!(s > 0.5 && s < 1.0)) fail("operator: assumption 1/2 < s < 1 violated (s = " + std::to_string(s) + ")");
    if (!(sigma > 0.0 && sigma < s)) {
        fail("operator: assumption 0 < sigma < s violated (sigma = " + std::to_string(sigma) +
             ", s = " + std::to_string(s) + ")");
    }
    if (!(lambda > 0.0 && lambda <= Lambda)) fail("operator: ellipticity requires 0 < lambda <= Lambda");
    if (static_cast<int>(b.size()) != dim) fail("operator: drift b must have one entry per dimension");
    for (double bi : b) {
        if (!std::isfinite(bi)) fail("operator: drift must be finite");
    }
    if (!std::isfinite(r)) fail("operator: r must be finite");
    switch (i_variant) {
        case IVariantKind::zero: break;
        case IVariantKind::linear:
            if (kernels.size() != 1) fail("operator: linear variant needs exactly one kernel");
            break;
        case IVariantKind::pucci_sup:
            if (kernels.empty()) fail("operator: pucci_sup variant needs a non-empty kernel family");
            break;
        case IVariantKind::g_integrand:
            if (!(sigma < 0.5)) fail("operator: g_integrand requires sigma < 1/2 (got " + std::to_string(sigma) + ")");
            break;
    }
    if (i_variant == IVariantKind::linear || i_variant == IVariantKind::pucci_sup) {
        for (const auto& k : kernels) {
            if (!k.profile) fail("operator: kernel '" + k.name + "' has no profile");
            if (std::abs(k.sigma - sigma) > 1e-14) fail("operator: kernel '" + k.name + "' order differs from sigma");
            if (k.lambda < lambda * (1 - 1e-12) || k.Lambda > Lambda * (1 + 1e-12)) {
                fail("operator: kernel '" + k.name + "' bounds lie outside [lambda, Lambda]");
            }
        }
    }
}

namespace {

struct LinearWeights {
    QuadratureWeights w;
    std::vector<double> far_sum;
    double lattice_sum = 0.0;
    double block_sum = 0.0;
    double tail_sum = 0.0;

    [[nodiscard]] double diagonal(double h) const { return -2.0 * (lattice_sum + block_sum / (h * h) + tail_sum); }
};

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

std::string format_point(const Point& y, int dim) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << y[0];
    if (dim == 2) os << ", " << y[1];
    os << ")";
    return os.str();
}

void check_envelope(const QuadratureGeometry& g, const KernelSpec& k) {
    const double lo = k.lambda * (1.0 - 1e-12);
    const double hi = k.Lambda * (1.0 + 1e-12);
    auto check = [&](const Point& y) {
        const double v = k.profile(y);
        const double m = k.profile({-y[0], -y[1]});
        if (!(v >= lo && v <= hi)) {
            throw ConfigError("kernel '" + k.name + "' leaves the [lambda, Lambda] envelope at quadrature node y = " +
                              format_point(y, g.grid.dim));
        }
        if (std::abs(v - m) > 1e-12 * std::max(1.0, std::abs(v))) {
            throw ConfigError("kernel '" + k.name + "' is not even at quadrature node y = " + format_point(y, g.grid.dim));
        }
    };
    for (const auto& o : g.offsets) check(o.y);
    for (const auto& d : g.directions) {
        const double r = 0.5 * g.block_radius(d.theta);
        check({r * d.dir[0], r * d.dir[1]});
    }
    for (const auto& t : g.tail) check(t.y);
}

}  // namespace

struct OperatorSet::Impl {
    Grid grid;
    OperatorParams params;
    QuadratureConfig quad;
    FarField far;
    QuadratureGeometry geom;
    BoundaryValues bv;
    BoundaryValues zero_bv;
    LinearWeights frac;
    QuadratureWeights pucci_w;
    std::vector<LinearWeights> family;
    // non-symmetric layout for the G-integrand variant
    std::unique_ptr<QuadratureGeometry> geom_full;
    BoundaryValues bv_full;
    QuadratureWeights g_w;

    LinearWeights linear_weights(const RadialKernel& kernel, const KernelProfile& profile) const {
        LinearWeights lw;
        lw.w = compute_weights(geom, kernel, 2, profile);
        lw.far_sum = tail_far_sum(geom, bv, lw.w.tail);
        lw.lattice_sum = sum(lw.w.lattice);
        lw.block_sum = sum(lw.w.block);
        lw.tail_sum = sum(lw.w.tail);
        return lw;
    }

    [[nodiscard]] std::vector<double> ext(const Field& u, bool homogeneous) const {
        if (!(u.grid == grid)) throw ConfigError("operator: field grid does not match operator grid");
        if (!u.all_finite()) throw NumericalError("operator: non-finite values in input field");
        return extend_lattice(geom, u, homogeneous ? zero_bv : bv);
    }

    // Hessian contraction along each block direction, fed to f.
    template <class F>
    double block_term(const QuadratureWeights& w, const double* e, long c, double ui, F&& f) const {
        const double h2 = grid.h * grid.h;
        if (grid.dim == 1) return w.block[0] * f((e[c + 1] + e[c - 1] - 2.0 * ui) / h2);
        const long E = geom.ext_width;
        const double h00 = (e[c + E] + e[c - E] - 2.0 * ui) / h2;
        const double h11 = (e[c + 1] + e[c - 1] - 2.0 * ui) / h2;
        const double h01 = (e[c + E + 1] + e[c - E - 1] - e[c + E - 1] - e[c - E + 1]) / (4.0 * h2);
        double acc = 0.0;
        for (std::size_t j = 0; j < geom.directions.size(); ++j) {
            const Point& d = geom.directions[j].dir;
            acc += w.block[j] * f(h00 * d[0] * d[0] + 2.0 * h01 * d[0] * d[1] + h11 * d[1] * d[1]);
        }
        return acc;
    }

    [[nodiscard]] Field apply_linear(const Field& u, const LinearWeights& lw, bool homogeneous) const {
        const auto e = ext(u, homogeneous);
        Field out(grid);
        const auto& offs = geom.offsets;
        const auto& wl = lw.w.lattice;
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(grid.size()); ++i) {
            const long c = geom.ext_index(i);
            const double ui = u[i];
            double acc = 0.0;
            for (std::size_t k = 0; k < offs.size(); ++k) {
                const long st = offs[k].stride;
                acc += wl[k] * (e[c + st] + e[c - st] - 2.0 * ui);
            }
            acc += block_term(lw.w, e.data(), c, ui, [](double q) { return q; });
            acc += (homogeneous ? 0.0 : lw.far_sum[i]) - 2.0 * ui * lw.tail_sum;
            out[i] = acc;
        }
        return out;
    }

    [[nodiscard]] Field apply_pucci(const Field& u, double up, double down, bool homogeneous) const {
        const auto e = ext(u, homogeneous);
        const BoundaryValues& b = homogeneous ? zero_bv : bv;
        Field out(grid);
        const auto& offs = geom.offsets;
        const auto& w = pucci_w;
        auto f = [up, down](double x) { return x > 0.0 ? up * x : down * x; };
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(grid.size()); ++i) {
            const long c = geom.ext_index(i);
            const double ui = u[i];
            double acc = 0.0;
            for (std::size_t k = 0; k < offs.size(); ++k) {
                const long st = offs[k].stride;
                acc += w.lattice[k] * f(e[c + st] + e[c - st] - 2.0 * ui);
            }
            acc += block_term(w, e.data(), c, ui, f);
            for (std::size_t j = 0; j < geom.tail.size(); ++j) acc += w.tail[j] * f(b.tail_value(geom, i, j) - 2.0 * ui);
            out[i] = acc;
        }
        return out;
    }

    [[nodiscard]] Field apply_g(const Field& u, bool homogeneous) const {
        const QuadratureGeometry& g = *geom_full;
        const BoundaryValues& b = homogeneous ? zero_bv : bv_full;
        const auto e = extend_lattice(g, u, b);
        Field out(grid);
        const double lam = params.lambda;
        const double Lam = params.Lambda;
        auto G = [lam, Lam](double x) { return x > 0.0 ? Lam * x : lam * x; };
        const long sx = grid.dim == 1 ? 1 : g.ext_width;
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(grid.size()); ++i) {
            const long c = g.ext_index(i);
            const double ui = u[i];
            double acc = 0.0;
            for (std::size_t k = 0; k < g.offsets.size(); ++k) acc += g_w.lattice[k] * G(e[c + g.offsets[k].stride] - ui);
            const double gx = (e[c + sx] - e[c - sx]) / (2.0 * grid.h);
            const double gy = grid.dim == 2 ? (e[c + 1] - e[c - 1]) / (2.0 * grid.h) : 0.0;
            for (std::size_t j = 0; j < g.directions.size(); ++j) {
                const Point& d = g.directions[j].dir;
                acc += g_w.block[j] * G(gx * d[0] + gy * d[1]);
            }
            for (std::size_t j = 0; j < g.tail.size(); ++j) acc += g_w.tail[j] * G(b.tail_value(g, i, j) - ui);
            out[i] = acc;
        }
        return out;
    }
};

OperatorSet::OperatorSet(const Grid& grid, OperatorParams params, QuadratureConfig quad, FarField far)
    : impl_(std::make_unique<Impl>()) {
    params.validate();
    quad.validate();
    if (params.dim != grid.dim) throw ConfigError("operator: parameter dimension does not match grid");
    Impl& m = *impl_;
    m.grid = grid;
    m.params = std::move(params);
    m.quad = quad;
    m.far = std::move(far);
    m.geom = build_geometry(grid, quad, true);
    m.bv = sample_boundary(m.geom, m.far);
    m.frac = m.linear_weights(PowerKernel(grid.dim, m.params.s), {});
    m.pucci_w = compute_weights(m.geom, PowerKernel(grid.dim, m.params.sigma), 2);
    for (const auto& k : m.params.kernels) {
        if (m.params.i_variant != IVariantKind::linear && m.params.i_variant != IVariantKind::pucci_sup) break;
        check_envelope(m.geom, k);
        m.family.push_back(m.linear_weights(PowerKernel(grid.dim, k.sigma), k.profile));
    }
    if (m.params.i_variant == IVariantKind::g_integrand) {
        m.geom_full = std::make_unique<QuadratureGeometry>(build_geometry(grid, quad, false));
        m.bv_full = sample_boundary(*m.geom_full, m.far);
        m.g_w = compute_weights(*m.geom_full, PowerKernel(grid.dim, m.params.sigma), 1);
    }
}

OperatorSet::~OperatorSet() = default;
OperatorSet::OperatorSet(OperatorSet&&) noexcept = default;
OperatorSet& OperatorSet::operator=(OperatorSet&&) noexcept = default;

const Grid& OperatorSet::grid() const noexcept { return impl_->grid; }
const OperatorParams& OperatorSet::params() const noexcept { return impl_->params; }
const QuadratureConfig& OperatorSet::quadrature() const noexcept { return impl_->quad; }
const FarField& OperatorSet::far() const noexcept { return impl_->far; }

Field OperatorSet::frac_laplacian(const Field& u, bool homogeneous) const {
    const double c = normalization_constant(impl_->grid.dim, impl_->params.s);
    Field out = impl_->apply_linear(u, impl_->frac, homogeneous);
    for (auto& v : out.values) v *= -0.5 * c;
    return out;
}

Field OperatorSet::kernel_operator(const Field& u, const KernelSpec& kernel, bool homogeneous) const {
    if (!kernel.profile) throw ConfigError("kernel '" + kernel.name + "' has no profile");
    if (!(kernel.sigma > 0.0 && kernel.sigma < 1.0)) throw ConfigError("kernel '" + kernel.name + "' order outside (0, 1)");
    check_envelope(impl_->geom, kernel);
    const auto lw = impl_->linear_weights(PowerKernel(impl_->grid.dim, kernel.sigma), kernel.profile);
    return impl_->apply_linear(u, lw, homogeneous);
}

Field OperatorSet::pucci(const Field& u, int sign, bool homogeneous) const {
    const double lam = impl_->params.lambda;
    const double Lam = impl_->params.Lambda;
    return sign >= 0 ? impl_->apply_pucci(u, Lam, lam, homogeneous) : impl_->apply_pucci(u, lam, Lam, homogeneous);
}

Field OperatorSet::i_apply(const Field& u, bool homogeneous) const {
    const Impl& m = *impl_;
    switch (m.params.i_variant) {
        case IVariantKind::zero:
            if (!(u.grid == m.grid)) throw ConfigError("operator: field grid does not match operator grid");
            return Field(m.grid);
        case IVariantKind::linear:
            return m.apply_linear(u, m.family.front(), homogeneous);
        case IVariantKind::pucci_sup: {
            Field out = m.apply_linear(u, m.family.front(), homogeneous);
            for (std::size_t k = 1; k < m.family.size(); ++k) {
                const Field next = m.apply_linear(u, m.family[k], homogeneous);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], next[i]);
            }
            return out;
        }
        case IVariantKind::g_integrand:
            return m.apply_g(u, homogeneous);
    }
    return Field(m.grid);
}

std::vector<Field> OperatorSet::gradient(const Field& u, bool homogeneous) const {
    const Impl& m = *impl_;
    const auto e = m.ext(u, homogeneous);
    std::vector<Field> out;
    for (int axis = 0; axis < m.grid.dim; ++axis) {
        const long st = (m.grid.dim == 2 && axis == 0) ? m.geom.ext_width : 1;
        Field g(m.grid);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const long c = m.geom.ext_index(i);
            g[i] = (e[c + st] - e[c - st]) / (2.0 * m.grid.h);
        }
        out.push_back(std::move(g));
    }
    return out;
}

Field OperatorSet::lower_order(const Field& u, bool homogeneous) const {
    const Impl& m = *impl_;
    Field out = i_apply(u, homogeneous);
    const auto e = m.ext(u, homogeneous);
    const double h = m.grid.h;
    for (int axis = 0; axis < m.grid.dim; ++axis) {
        const double b = m.params.b[axis];
        if (b == 0.0) continue;
        const long st = (m.grid.dim == 2 && axis == 0) ? m.geom.ext_width : 1;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const long c = m.geom.ext_index(i);
            double d;
            if (!m.params.upwind) {
                d = (e[c + st] - e[c - st]) / (2.0 * h);
            } else if (b > 0.0) {
                d = (e[c + st] - e[c]) / h;
            } else {
                d = (e[c] - e[c - st]) / h;
            }
            out[i] += b * d;
        }
    }
    if (m.params.r != 0.0) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += m.params.r * u[i];
    }
    return out;
}

TailReport OperatorSet::tail_report(const Field& u) const {
    const Impl& m = *impl_;
    const auto [lo, hi] = std::minmax_element(u.values.begin(), u.values.end());
    const double osc = u.size() ? *hi - *lo : 0.0;
    TailReport rep;
    const double factor = m.params.Lambda * std::pow(m.geom.tail_radius, -2.0 * m.params.sigma);
    rep.bound = factor * osc;
    rep.warning = factor > m.quad.tolerance;
    return rep;
}

SandwichReport OperatorSet::sandwich_check(const Field& u, const Field& v) const {
    const Field diff = u - v;
    const Field iu = i_apply(u);
    const Field iv = i_apply(v);
    const Field mp = pucci(diff, +1, true);
    const Field mm = pucci(diff, -1, true);
    SandwichReport rep;
    rep.lower_violation = -std::numeric_limits<double>::infinity();
    rep.upper_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < diff.size(); ++i) {
        const double di = iu[i] - iv[i];
        rep.lower_violation = std::max(rep.lower_violation, mm[i] - di);
        rep.upper_violation = std::max(rep.upper_violation, di - mp[i]);
    }
    return rep;
}

double OperatorSet::frac_laplacian_diagonal() const {
    const Impl& m = *impl_;
    return -0.5 * normalization_constant(m.grid.dim, m.params.s) * m.frac.diagonal(m.grid.h);
}

double OperatorSet::lower_order_diagonal_bound() const {
    const Impl& m = *impl_;
    double bound = 0.0;
    for (const auto& lw : m.family) bound = std::max(bound, std::abs(lw.diagonal(m.grid.h)));
    if (m.params.i_variant == IVariantKind::g_integrand) {
        bound = m.params.Lambda * (sum(m.g_w.lattice) + sum(m.g_w.tail));
    }
    for (double b : m.params.b) bound += std::abs(b) / m.grid.h;
    return bound + std::abs(m.params.r);
}

std::vector<double> OperatorSet::frac_laplacian_matrix() const {
    const Impl& m = *impl_;
    if (m.grid.dim != 1) throw ConfigError("frac_laplacian_matrix: dense assembly is for d = 1 only");
    const auto n = static_cast<long>(m.grid.size());
    const double scale = -0.5 * normalization_constant(1, m.params.s);
    const double h2 = m.grid.h * m.grid.h;
    std::vector<double> a(static_cast<std::size_t>(n * n), 0.0);
    const double diag = m.frac.diagonal(m.grid.h);
    for (long i = 0; i < n; ++i) {
        double* row = a.data() + i * n;
        row[i] += diag;
        for (std::size_t k = 0; k < m.geom.offsets.size(); ++k) {
            const long off = m.geom.offsets[k].stride;
            if (i + off < n) row[i + off] += m.frac.w.lattice[k];
            if (i - off >= 0) row[i - off] += m.frac.w.lattice[k];
        }
        if (i + 1 < n) row[i + 1] += m.frac.w.block[0] / h2;
        if (i - 1 >= 0) row[i - 1] += m.frac.w.block[0] / h2;
        for (long j = 0; j < n; ++j) row[j] *= scale;
    }
    return a;
}

Field frac_laplacian(const Field& u, const OperatorParams& params, const QuadratureConfig& quad, const FarField& far) {
    OperatorParams p = params;
    p.i_variant = IVariantKind::zero;
    p.kernels.clear();
    return OperatorSet(u.grid, p, quad, far).frac_laplacian(u);
}

Field kernel_operator(const Field& u, const KernelSpec& kernel, const QuadratureConfig& quad, const FarField& far) {
    OperatorParams p;
    p.dim = u.grid.dim;
    p.b.assign(p.dim, 0.0);
    return OperatorSet(u.grid, p, quad, far).kernel_operator(u, kernel);
}

Field pucci(const Field& u, const OperatorParams& params, int sign, const QuadratureConfig& quad, const FarField& far) {
    return OperatorSet(u.grid, params, quad, far).pucci(u, sign);
}

Field i_apply(const Field& u, const OperatorParams& params, const QuadratureConfig& quad, const FarField& far) {
    return OperatorSet(u.grid, params, quad, far).i_apply(u);
}

std::vector<Field> gradient(const Field& u, const FarField& far) {
    OperatorParams p;
    p.dim = u.grid.dim;
    p.b.assign(p.dim, 0.0);
    return OperatorSet(u.grid, p, QuadratureConfig{}, far).gradient(u);
}

Field lower_order_apply(const Field& u, const OperatorParams& params, const QuadratureConfig& quad, const FarField& far) {
    return OperatorSet(u.grid, params, quad, far).lower_order(u);
}

SandwichReport sandwich_check(const Field& u, const Field& v, const OperatorParams& params,
                              const QuadratureConfig& quad, const FarField& far) {
    return OperatorSet(u.grid, params, quad, far).sandwich_check(u, v);
}

}  // namespace fracobstacle
