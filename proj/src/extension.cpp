#include "fracobstacle/extension.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "fracobstacle/error.hpp"
#include "fracobstacle/numerics.hpp"

namespace fracobstacle {

namespace {

constexpr double pi = std::numbers::pi;

// int_lo^hi t^e (1 + t^2)^(-q) dt on [lo, 1] and octave panels beyond;
// hi = inf adds the algebraic remainder after 2^60 lo.
double profile_integral(double e, double q, double lo, double hi) {
    const auto& rule = numerics::gauss_legendre(16);
    auto f = [e, q](double t) { return std::pow(t, e) * std::pow(1.0 + t * t, -q); };
    auto panel = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
            s += rule.weights[k] * f(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k]);
        }
        return 0.5 * (b - a) * s;
    };
    const bool infinite = std::isinf(hi);
    const double stop = infinite ? std::max(lo, 1.0) * std::ldexp(1.0, 60) : hi;
    double total = 0.0;
    double a = lo;
    if (a < 1.0) {
        const double b = std::min(1.0, stop);
        total += panel(a, b);
        a = b;
    }
    while (a < stop) {
        const double b = std::min(2.0 * a, stop);
        total += panel(a, b);
        a = b;
    }
    if (infinite) {
        const double p = e - 2.0 * q;  // integrand ~ t^p
        total += std::pow(stop, p + 1.0) / -(p + 1.0);
    }
    return total;
}

class PoissonRadial final : public RadialKernel {
public:
    PoissonRadial(int dim, double s, double y)
        : RadialKernel(dim), s_(s), y_(y), c_(poisson_constant(dim, s)), q_(0.5 * (dim + 2.0 * s)) {}

    [[nodiscard]] double value(double rho) const override {
        return c_ * std::pow(y_, 2.0 * s_) * std::pow(rho * rho + y_ * y_, -q_);
    }
    [[nodiscard]] double inner_moment(double radius, int p) const override {
        return c_ * std::pow(y_, p) * profile_integral(dim() - 1.0 + p, q_, 0.0, radius / y_);
    }
    [[nodiscard]] double outer_mass(double radius) const override {
        return c_ * profile_integral(dim() - 1.0, q_, radius / y_, std::numeric_limits<double>::infinity());
    }

private:
    double s_;
    double y_;
    double c_;
    double q_;
};

double total(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

void require_extension_exponent(double s) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("extension: s must lie in (0, 1)");
}

// Derivative along y at level j on the graded mesh.
double y_derivative(const ExtensionField& e, std::size_t node, std::size_t j) {
    const auto& y = e.y;
    const std::size_t m = y.size();
    if (j == 0) return (e.at(node, 1) - e.at(node, 0)) / (y[1] - y[0]);
    if (j + 1 == m) return (e.at(node, j) - e.at(node, j - 1)) / (y[j] - y[j - 1]);
    const double h1 = y[j] - y[j - 1];
    const double h2 = y[j + 1] - y[j];
    return -h2 / (h1 * (h1 + h2)) * e.at(node, j - 1) + (h2 - h1) / (h1 * h2) * e.at(node, j) +
           h1 / (h2 * (h1 + h2)) * e.at(node, j + 1);
}

// Derivative along x-axis `axis` at a node, one-sided at the box edge.
double x_derivative(const ExtensionField& e, std::size_t node, std::size_t j, int axis) {
    const Grid& g = e.grid;
    const auto mi = g.multi_index(node);
    auto p = mi;
    auto m = mi;
    p[axis] += 1;
    m[axis] -= 1;
    const bool hp = g.contains_index(p[0], p[1]);
    const bool hm = g.contains_index(m[0], m[1]);
    const double up = hp ? e.at(g.flat_index(p[0], p[1]), j) : e.at(node, j);
    const double dn = hm ? e.at(g.flat_index(m[0], m[1]), j) : e.at(node, j);
    const double span = (hp ? g.h : 0.0) + (hm ? g.h : 0.0);
    return (up - dn) / span;
}

// Share of the box [lo, hi] lying in the shell r_in <= |z| <= r_out.
double shell_fraction(const std::array<double, 3>& lo, const std::array<double, 3>& hi, int dims, double r_in,
                      double r_out) {
    double near2 = 0.0;
    double far2 = 0.0;
    for (int k = 0; k < dims; ++k) {
        const double n = lo[k] > 0.0 ? lo[k] : (hi[k] < 0.0 ? -hi[k] : 0.0);
        const double f = std::max(std::abs(lo[k]), std::abs(hi[k]));
        near2 += n * n;
        far2 += f * f;
    }
    const double near = std::sqrt(near2);
    const double far = std::sqrt(far2);
    if (near >= r_in && far <= r_out) return 1.0;
    if (near > r_out || far < r_in) return 0.0;
    constexpr int sub = 8;
    int hit = 0;
    int total_pts = 0;
    std::array<int, 3> idx{0, 0, 0};
    const int count = dims == 2 ? sub * sub : sub * sub * sub;
    for (int c = 0; c < count; ++c) {
        int rem = c;
        for (int k = 0; k < dims; ++k) {
            idx[k] = rem % sub;
            rem /= sub;
        }
        double r2 = 0.0;
        for (int k = 0; k < dims; ++k) {
            const double z = lo[k] + (hi[k] - lo[k]) * (idx[k] + 0.5) / sub;
            r2 += z * z;
        }
        const double r = std::sqrt(r2);
        hit += (r >= r_in && r <= r_out);
        ++total_pts;
    }
    return static_cast<double>(hit) / total_pts;
}

double cross(const Point& o, const Point& a, const Point& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

bool hull_contains(const std::vector<Point>& hull, const Point& q, double tol) {
    if (hull.empty()) return false;
    if (hull.size() == 1) return std::hypot(hull[0][0] - q[0], hull[0][1] - q[1]) <= tol;
    if (hull.size() == 2) {
        const Point& a = hull[0];
        const Point& b = hull[1];
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        if (std::abs(cross(a, b, q)) > tol * len) return false;
        const double t = ((q[0] - a[0]) * (b[0] - a[0]) + (q[1] - a[1]) * (b[1] - a[1])) / (len * len);
        return t >= -tol && t <= 1.0 + tol;
    }
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % hull.size()];
        if (cross(a, b, q) < -tol * std::hypot(b[0] - a[0], b[1] - a[1])) return false;
    }
    return true;
}

// Graded map of (0, 1) onto (0, pi) clustering nodes at both ends.
struct GradedAngle {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GradedAngle graded_angle(int resolution) {
    constexpr double q = 6.0;
    constexpr int per_panel = 16;
    const int panels = std::max(1, resolution / per_panel);
    const auto& rule = numerics::gauss_legendre(per_panel);
    GradedAngle out;
    for (int p = 0; p < panels; ++p) {
        const double a = static_cast<double>(p) / panels;
        const double b = static_cast<double>(p + 1) / panels;
        for (int k = 0; k < per_panel; ++k) {
            const double u = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[k];
            const double uq = std::pow(u, q);
            const double vq = std::pow(1.0 - u, q);
            const double den = uq + vq;
            const double jac = q * std::pow(u, q - 1.0) * std::pow(1.0 - u, q - 1.0) / (den * den);
            out.nodes.push_back(pi * uq / den);
            out.weights.push_back(0.5 * (b - a) * rule.weights[k] * pi * jac);
        }
    }
    return out;
}

}  // namespace

double poisson_constant(int dim, double s) {
    require_extension_exponent(s);
    if (dim < 1 || dim > 2) throw ConfigError("poisson_constant: dim must be 1 or 2");
    return std::tgamma(0.5 * dim + s) / (std::pow(pi, 0.5 * dim) * std::tgamma(s));
}

double poisson_kernel(int dim, double s, const Point& x, double y) {
    if (!(y > 0.0)) throw ConfigError("poisson_kernel: y must be positive");
    const double r2 = x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
    return poisson_constant(dim, s) * std::pow(y, 2.0 * s) * std::pow(r2 + y * y, -0.5 * (dim + 2.0 * s));
}

double flux_scale(int dim, double s) {
    return normalization_constant(dim, s) / (2.0 * s * poisson_constant(dim, s));
}

std::vector<double> graded_mesh(double Y, int M, double power) {
    if (!(Y > 0.0)) throw ConfigError("graded_mesh: Y must be positive");
    if (M < 32) throw ConfigError("graded_mesh: at least 32 levels are required");
    if (!(power >= 2.0)) throw ConfigError("graded_mesh: grading power must be >= 2");
    std::vector<double> y(M + 1);
    for (int j = 0; j <= M; ++j) y[j] = Y * std::pow(static_cast<double>(j) / M, power);
    return y;
}

Field ExtensionField::level(std::size_t j) const {
    if (j >= levels()) throw ConfigError("extension: level out of range");
    const auto n = grid.size();
    return Field(grid, std::vector<double>(values.begin() + j * n, values.begin() + (j + 1) * n));
}

ExtensionField extend(const Field& boundary, const ExtensionParams& params, const FarField& far) {
    require_extension_exponent(params.s);
    if (!boundary.all_finite()) throw NumericalError("extend: non-finite boundary data");
    const Grid& g = boundary.grid;
    ExtensionField ext;
    ext.grid = g;
    ext.s = params.s;
    ext.y = graded_mesh(params.Y > 0.0 ? params.Y : 0.5 * g.half_width, params.M, params.grading);
    ext.values.assign(ext.levels() * g.size(), 0.0);
    std::copy(boundary.values.begin(), boundary.values.end(), ext.values.begin());

    const QuadratureGeometry geom = build_geometry(g, params.quad, true);
    const BoundaryValues bv = sample_boundary(geom, far);
    for (std::size_t j = 1; j < ext.levels(); ++j) {
        const PoissonRadial kernel(g.dim, params.s, ext.y[j]);
        const QuadratureWeights mass = compute_weights(geom, kernel, 0);
        const double drift = total(mass.lattice) + total(mass.block) + total(mass.tail) - 1.0;
        if (!(std::abs(drift) <= 1e-6)) {
            throw NumericalError("extend: kernel mass drifts by " + std::to_string(drift) + " at y = " +
                                 std::to_string(ext.y[j]));
        }
        const QuadratureWeights w = compute_weights(geom, kernel, 2);
        const Field jump = apply_second_differences(geom, w, boundary, bv, tail_far_sum(geom, bv, w.tail));
        for (std::size_t i = 0; i < g.size(); ++i) ext.at(i, j) = boundary[i] + 0.5 * jump[i];
    }
    return ext;
}

FluxReport normal_flux_report(const ExtensionField& ext) {
    constexpr std::size_t fit_levels = 6;
    if (ext.levels() < fit_levels + 1) throw ConfigError("normal_flux: need at least 7 mesh levels");
    const double e = 1.0 - ext.a();
    Eigen::Matrix<double, fit_levels, 2> basis;
    for (std::size_t j = 0; j < fit_levels; ++j) {
        const double y = ext.y[j + 1];
        basis(j, 0) = std::pow(y, e);
        basis(j, 1) = y * y;
    }
    const Eigen::Vector2d scale(basis.col(0).cwiseAbs().maxCoeff(), basis.col(1).cwiseAbs().maxCoeff());
    const Eigen::Matrix<double, fit_levels, 2> scaled = basis * scale.cwiseInverse().asDiagonal();
    const auto qr = scaled.colPivHouseholderQr();
    const double ds = flux_scale(ext.grid.dim, ext.s);
    const double leading = std::pow(ext.y[fit_levels], e);

    FluxReport rep;
    rep.flux = Field(ext.grid);
    double vmax = 0.0;
    for (std::size_t i = 0; i < ext.grid.size(); ++i) vmax = std::max(vmax, std::abs(ext.at(i, 0)));
    const double floor = 1e-12 * (1.0 + vmax);
    for (std::size_t i = 0; i < ext.grid.size(); ++i) {
        Eigen::Matrix<double, fit_levels, 1> rhs;
        for (std::size_t j = 0; j < fit_levels; ++j) rhs(j) = ext.at(i, j + 1) - ext.at(i, 0);
        const Eigen::Vector2d c = qr.solve(rhs).cwiseQuotient(scale);
        const double resid = (basis * c - rhs).cwiseAbs().maxCoeff();
        if (resid > 0.1 * std::abs(c(0)) * leading + floor) rep.flagged.push_back(i);
        rep.flux[i] = -c(0) * e * ds;
    }
    return rep;
}

Field normal_flux(const ExtensionField& ext) { return normal_flux_report(ext).flux; }

WField build_w(const Field& u, const OperatorSet& ops, const ContactMask& mask, std::size_t origin,
               const ExtensionParams& params, double tol) {
    if (!(u.grid == mask.grid)) throw ConfigError("build_w: mask grid differs from field grid");
    if (mask.empty()) throw ConfigError("build_w: no contact set");
    if (origin >= u.size() || !mask.inside[origin]) throw ConfigError("build_w: origin is not a contact node");
    const Grid& g = u.grid;
    bool on_boundary = false;
    const auto mi = g.multi_index(origin);
    for (int axis = 0; axis < g.dim; ++axis) {
        for (int sgn : {-1, 1}) {
            auto m = mi;
            m[axis] += sgn;
            if (g.contains_index(m[0], m[1]) && !mask.inside[g.flat_index(m[0], m[1])]) on_boundary = true;
        }
    }
    if (!on_boundary) throw ConfigError("build_w: origin is not a free-boundary node");
    if (!(tol >= 0.0)) throw ConfigError("build_w: tolerance must be non-negative");

    const Field frac = ops.frac_laplacian(u);
    const Field lower = ops.lower_order(u);
    WField out;
    WBoundary& b = out.boundary;
    b.mask = mask;
    b.origin = origin;
    b.r_origin = lower[origin];
    b.values = Field(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!mask.inside[i]) continue;
        double w = frac[i] - b.r_origin;
        b.most_negative = std::min(b.most_negative, w);
        if (w < -tol) {
            w = -tol;
            ++b.clipped;
        }
        b.values[i] = w;
    }
    ExtensionParams wp = params;
    wp.s = 1.0 - ops.params().s;
    out.extension = extend(b.values, wp, {});
    out.extension.origin = g.node(origin);
    return out;
}

double phi(const ExtensionField& ext_w, double r) {
    const Grid& g = ext_w.grid;
    const int n = g.dim;
    const double a = -ext_w.a();
    if (r < 8.0 * g.h * (1.0 - 1e-12)) throw ConfigError("phi: unresolved radius");
    if (r > std::min(g.half_width, ext_w.y.back()) * (1.0 + 1e-12)) throw ConfigError("phi: radius exceeds min(L, Y)");
    const Point& o = ext_w.origin;
    for (int k = 0; k < n; ++k) {
        if (o[k] - r < -g.half_width - 1e-12 || o[k] + r > g.half_width + 1e-12) {
            throw ConfigError("phi: half-ball leaves the box");
        }
    }
    const double r_in = 2.0 * g.h;
    const auto& y = ext_w.y;
    const std::size_t m = y.size();
    double sum = 0.0;
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : sum)
    for (long jl = 0; jl < static_cast<long>(m); ++jl) {
        const auto j = static_cast<std::size_t>(jl);
        const double ylo = j == 0 ? 0.0 : 0.5 * (y[j - 1] + y[j]);
        const double yhi = j + 1 == m ? y[j] : 0.5 * (y[j] + y[j + 1]);
        if (ylo > r) continue;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Point x = g.node(i);
            std::array<double, 3> lo{};
            std::array<double, 3> hi{};
            double rho2 = 0.0;
            for (int k = 0; k < n; ++k) {
                const double z = x[k] - o[k];
                lo[k] = std::max(z - 0.5 * g.h, -g.half_width - o[k]);
                hi[k] = std::min(z + 0.5 * g.h, g.half_width - o[k]);
                rho2 += z * z;
            }
            lo[n] = ylo;
            hi[n] = yhi;
            const double frac = shell_fraction(lo, hi, n + 1, r_in, r);
            if (frac == 0.0 || y[j] == 0.0) continue;
            double vol = yhi - ylo;
            for (int k = 0; k < n; ++k) vol *= hi[k] - lo[k];
            double grad2 = std::pow(y_derivative(ext_w, i, j), 2);
            for (int k = 0; k < n; ++k) grad2 += std::pow(x_derivative(ext_w, i, j, k), 2);
            const double rho = std::sqrt(rho2 + y[j] * y[j]);
            sum += frac * vol * grad2 * std::pow(y[j], -a) * std::pow(rho, -(n - 1.0 - a));
        }
    }
    return sum / std::pow(r, 1.0 + a);
}

MonotonicityReport monotonicity_report(const ExtensionField& ext_w, const std::vector<double>& radii, double alpha,
                                       double multiplier) {
    if (radii.empty()) throw ConfigError("monotonicity_report: no radii");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("monotonicity_report: alpha must lie in (0, 1)");
    const double s = 1.0 - ext_w.s;
    MonotonicityReport rep;
    rep.alpha = alpha;
    rep.delta = 0.25 * (alpha / (alpha + 2.0 * s) - 0.5 * alpha);
    rep.eta = std::sqrt((2.0 - 2.0 * s) / (2.0 * ext_w.grid.dim));
    rep.multiplier = multiplier;
    rep.radii = radii;
    for (double r : radii) rep.values.push_back(phi(ext_w, r));
    rep.phi_one = rep.values[std::max_element(radii.begin(), radii.end()) - radii.begin()];
    for (double v : rep.values) rep.worst_ratio = std::max(rep.worst_ratio, v / (1.0 + rep.phi_one));
    return rep;
}

bool convex_hull_check(const WBoundary& w, const Point& origin, double r, double alpha, double delta) {
    const Grid& g = w.values.grid;
    const double level = std::pow(r, alpha + delta);
    std::vector<Point> pts;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.node(i);
        const Point z{x[0] - origin[0], x[1] - origin[1]};
        if (std::hypot(z[0], z[1]) > r * (1.0 + 1e-12)) continue;
        if (w.values[i] >= level) pts.push_back(z);
    }
    if (pts.empty()) return true;
    const double tol = 1e-9 * g.h;
    if (g.dim == 1) {
        const auto [lo, hi] = std::minmax_element(pts.begin(), pts.end());
        return !((*lo)[0] <= tol && (*hi)[0] >= -tol);
    }
    return !hull_contains(convex_hull(std::move(pts)), {0.0, 0.0}, tol);
}

SphereFunction halfsphere_eigenfunction(double s) {
    return [s](double al, double be) -> std::array<double, 3> {
        const double sa = std::sin(al);
        const double ca = std::cos(al);
        const double omc = 2.0 * std::pow(std::sin(0.5 * be), 2);
        const double e = 1.0 - s;
        const double h = std::pow(sa * omc, e);
        const double h_al = e * std::pow(sa, -s) * ca * std::pow(omc, e);
        const double h_be = e * std::pow(sa, e) * std::pow(omc, -s) * std::sin(be);
        return {h, h_al, h_be};
    };
}

double halfsphere_rayleigh(double s, int resolution, const SphereFunction& h) {
    require_extension_exponent(s);
    if (resolution < 64) throw ConfigError("halfsphere_rayleigh: resolution must be at least 64 per angle");
    const double a = 1.0 - 2.0 * s;
    const GradedAngle q = graded_angle(resolution);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double al = q.nodes[i];
        const double sa = std::sin(al);
        for (std::size_t k = 0; k < q.nodes.size(); ++k) {
            const double be = q.nodes[k];
            const auto v = h(al, be);
            const double weight = q.weights[i] * q.weights[k] * sa * std::pow(sa * std::sin(be), -a);
            num += weight * (v[1] * v[1] + v[2] * v[2] / (sa * sa));
            den += weight * v[0] * v[0];
        }
    }
    return num / den;
}

double halfsphere_rayleigh(int n, double s, int resolution) {
    if (n != 2) throw ConfigError("halfsphere_rayleigh: only n = 2 is supported");
    return halfsphere_rayleigh(s, resolution, halfsphere_eigenfunction(s));
}

VTildeReport vtilde_bounds_check(const ExtensionField& ext, const Field& psi, const ContactMask& mask,
                                 double r_origin, double C0, double C1, double gamma) {
    if (!(psi.grid == ext.grid) || !(mask.grid == ext.grid)) throw ConfigError("vtilde_bounds_check: grid mismatch");
    const Grid& g = ext.grid;
    const double a = ext.a();
    const double ds = flux_scale(g.dim, ext.s);
    VTildeReport rep;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!mask.inside[i]) continue;
        const Point x = g.node(i);
        const double dist = std::hypot(x[0] - ext.origin[0], x[1] - ext.origin[1]);
        for (std::size_t j = 1; j < ext.levels(); ++j) {
            const double y = ext.y[j];
            const double flux_mode = std::pow(y, 1.0 - a) / ((1.0 - a) * ds);
            const double diff = ext.at(i, j) - ext.at(i, 0) + r_origin * flux_mode;
            const double bound = g.dim * C0 * y * y / (1.0 + a) + C1 * std::pow(dist, gamma) * flux_mode;
            double ratio;
            if (bound > 0.0) {
                ratio = diff / bound;
            } else {
                ratio = diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
            }
            if (ratio > rep.worst_ratio) {
                rep.worst_ratio = ratio;
                rep.node = i;
                rep.level = j;
            }
        }
    }
    return rep;
}

std::vector<double> flux_decay_profile(const ExtensionField& ext, const Field& psi, double r_origin, int k_max) {
    if (!(psi.grid == ext.grid)) throw ConfigError("flux_decay_profile: grid mismatch");
    const Grid& g = ext.grid;
    const double a = ext.a();
    const double eta = std::sqrt((1.0 + a) / (2.0 * g.dim));
    const double ds = flux_scale(g.dim, ext.s);
    std::vector<double> out;
    for (int k = 0; k <= k_max; ++k) {
        const double r = std::pow(4.0, -k);
        double inf = std::numeric_limits<double>::infinity();
        bool resolved = r >= 2.0 * g.h;
        for (std::size_t j = 1; resolved && j + 1 < ext.levels() && ext.y[j] <= eta * r; ++j) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Point x = g.node(i);
                if (std::hypot(x[0] - ext.origin[0], x[1] - ext.origin[1]) > r) continue;
                // y^a d/dy of the flux mode is R u(0) / d_s
                const double flux = std::pow(ext.y[j], a) * y_derivative(ext, i, j) + r_origin / ds;
                inf = std::min(inf, flux);
            }
        }
        out.push_back(resolved && std::isfinite(inf) ? inf : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

void write_extension_csv(std::ostream& out, const ExtensionField& ext) {
    out.precision(17);
    out << (ext.grid.dim == 1 ? "x,y,value\n" : "x0,x1,y,value\n");
    for (std::size_t j = 0; j < ext.levels(); ++j) {
        for (std::size_t i = 0; i < ext.grid.size(); ++i) {
            const Point x = ext.grid.node(i);
            out << x[0] << ',';
            if (ext.grid.dim == 2) out << x[1] << ',';
            out << ext.y[j] << ',' << ext.at(i, j) << '\n';
        }
    }
}

void write_monotonicity_csv(std::ostream& out, const MonotonicityReport& rep) {
    out.precision(17);
    out << "r,phi\n";
    for (std::size_t k = 0; k < rep.radii.size(); ++k) out << rep.radii[k] << ',' << rep.values[k] << '\n';
}

}  // namespace fracobstacle
