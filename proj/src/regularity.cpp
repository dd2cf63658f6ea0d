#include "fracobstacle/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracobstacle/error.hpp"
#include "fracobstacle/numerics.hpp"

namespace fracobstacle {

namespace {

void require_same_grid(const Field& a, const Field& b, const char* what) {
    if (!(a.grid == b.grid)) throw ConfigError(std::string(what) + ": fields live on different grids");
}

double distance(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

// Axis neighbours that exist on the grid.
template <class F>
void for_each_neighbour(const Grid& g, std::size_t idx, F&& f) {
    const auto mi = g.multi_index(idx);
    for (int axis = 0; axis < g.dim; ++axis) {
        for (int sgn : {-1, 1}) {
            auto m = mi;
            m[axis] += sgn;
            if (g.contains_index(m[0], m[1])) f(g.flat_index(m[0], m[1]));
        }
    }
}

}  // namespace

std::size_t ContactMask::count() const {
    return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), char{1}));
}

ContactMask contact_set(const Field& u, const Field& psi, double tol) {
    require_same_grid(u, psi, "contact_set");
    if (!(tol >= 0.0)) throw ConfigError("contact_set: tolerance must be non-negative");
    ContactMask m;
    m.grid = u.grid;
    m.tol = tol;
    m.inside.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) m.inside[i] = u[i] - psi[i] <= tol ? 1 : 0;
    return m;
}

double projected_contact_tol(const Grid& grid, double s) { return std::pow(grid.h, 1.0 + s); }

double penalized_contact_tol(double eps) { return 10.0 * eps; }

FreeBoundary free_boundary(const ContactMask& mask) {
    if (mask.empty()) throw ConfigError("free_boundary: contact mask is empty");
    if (mask.full()) throw ConfigError("free_boundary: contact mask covers the whole grid");
    FreeBoundary fb;
    for (std::size_t i = 0; i < mask.inside.size(); ++i) {
        if (!mask.inside[i]) continue;
        bool edge = false;
        for_each_neighbour(mask.grid, i, [&](std::size_t j) { edge = edge || !mask.inside[j]; });
        if (edge) fb.nodes.push_back(i);
    }
    fb.degenerate = fb.nodes.size() == mask.count() && fb.nodes.size() >= 4;
    return fb;
}

std::size_t probe_point(const ContactMask& mask) {
    const FreeBoundary fb = free_boundary(mask);
    const Grid& g = mask.grid;
    std::size_t best = fb.nodes.front();
    double best_dist = -1.0;
    for (std::size_t i : fb.nodes) {
        const Point x = g.node(i);
        double d = g.half_width - std::abs(x[0]);
        if (g.dim == 2) d = std::min(d, g.half_width - std::abs(x[1]));
        if (d > best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

std::string ExponentFit::range() const {
    if (abscissae.empty()) return "";
    const auto [lo, hi] = std::minmax_element(abscissae.begin(), abscissae.end());
    std::ostringstream os;
    os.precision(4);
    os << "[" << *lo << ";" << *hi << "]";
    return os.str();
}

ExponentFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_power_law: need at least two matching samples");
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0 && y[k] > 0.0)) throw NumericalError("fit_power_law: samples must be positive");
        lx.push_back(std::log(x[k]));
        ly.push_back(std::log(y[k]));
    }
    const auto line = numerics::fit_line(lx, ly);
    ExponentFit fit;
    fit.kappa = line.slope;
    fit.abscissae = x;
    fit.values = y;
    for (std::size_t k = 0; k + 1 < lx.size(); ++k) {
        const double local = (ly[k + 1] - ly[k]) / (lx[k + 1] - lx[k]);
        fit.band = std::max(fit.band, std::abs(local - fit.kappa));
    }
    return fit;
}

std::vector<double> dyadic_radii(double r_min, double r_max) {
    if (!(r_min > 0.0 && r_max >= r_min)) throw ConfigError("dyadic_radii: need 0 < r_min <= r_max");
    std::vector<double> out;
    for (double r = r_max; r >= r_min * (1.0 - 1e-12); r *= 0.5) out.push_back(r);
    return out;
}

ExponentFit decay_exponent(const Field& u, const Field& psi, std::size_t x0, const std::vector<double>& radii) {
    require_same_grid(u, psi, "decay_exponent");
    const Grid& g = u.grid;
    if (x0 >= g.size()) throw ConfigError("decay_exponent: probe node outside the grid");
    const Point c = g.node(x0);
    const double lo = 8.0 * g.h * (1.0 - 1e-12);
    const double hi = 0.25 * g.half_width * (1.0 + 1e-12);
    std::vector<double> rs;
    std::vector<double> sups;
    for (double r : radii) {
        if (r < lo || r > hi) throw ConfigError("decay_exponent: radius " + std::to_string(r) + " outside [8h, L/4]");
        double sup = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (distance(g.node(i), c) <= r * (1.0 + 1e-12)) sup = std::max(sup, std::abs(u[i] - psi[i]));
        }
        if (sup > 0.0) {
            rs.push_back(r);
            sups.push_back(sup);
        }
    }
    if (rs.size() < 4) throw ConfigError("decay_exponent: fewer than 4 resolved radii");
    return fit_power_law(rs, sups);
}

double holder_seminorm(const Field& f, double beta, double window) {
    if (!(beta > 0.0 && beta < 2.0)) throw ConfigError("holder_seminorm: beta must lie in (0, 2)");
    const Grid& g = f.grid;
    if (!(window > 0.0 && window <= 2.0 * g.half_width * std::sqrt(2.0) + 1e-12)) {
        throw ConfigError("holder_seminorm: window must lie in (0, box diameter]");
    }
    const int reach = static_cast<int>(std::floor(window / g.h + 1e-9));
    const long n = static_cast<long>(g.size());
    double best = 0.0;
#pragma omp parallel for schedule(dynamic, 16) reduction(max : best)
    for (long i = 0; i < n; ++i) {
        const auto mi = g.multi_index(i);
        const int lo1 = g.dim == 2 ? -reach : 0;
        const int hi1 = g.dim == 2 ? reach : 0;
        for (int k0 = 0; k0 <= reach; ++k0) {
            for (int k1 = lo1; k1 <= hi1; ++k1) {
                if (k0 == 0 && k1 <= 0) continue;  // each unordered pair once
                const int j0 = mi[0] + k0;
                const int j1 = mi[1] + k1;
                if (!g.contains_index(j0, j1)) continue;
                const double dist = g.h * std::hypot(k0, k1);
                if (dist > window * (1.0 + 1e-12)) continue;
                const double q = std::abs(f[i] - f[g.flat_index(j0, j1)]) / std::pow(dist, beta);
                best = std::max(best, q);
            }
        }
    }
    return best;
}

TimeSelector time_selector_from_string(const std::string& name) {
    if (name == "u") return TimeSelector::u;
    if (name == "dt_u") return TimeSelector::dt_u;
    if (name == "fraclap_u") return TimeSelector::fraclap_u;
    throw ConfigError("unknown time selector '" + name + "'");
}

Trajectory time_derivative(const Trajectory& traj) {
    if (traj.size() < 2) throw ConfigError("time_derivative: need at least two snapshots");
    Trajectory out;
    out.dt = traj.dt;
    const std::size_t m = traj.size();
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t a = k == 0 ? 0 : k - 1;
        const std::size_t b = k + 1 == m ? k : k + 1;
        const double span = traj.times[b] - traj.times[a];
        out.push(traj.times[k], (1.0 / span) * (traj.fields[b] - traj.fields[a]));
    }
    return out;
}

ExponentFit time_exponent(const Trajectory& traj, std::size_t node, TimeSelector selector, const OperatorSet* ops) {
    if (traj.size() < 16) throw ConfigError("time_exponent: need at least 16 snapshots");
    if (node >= traj.grid().size()) throw ConfigError("time_exponent: node outside the grid");
    std::vector<double> f;
    std::vector<double> t;
    double noise = 4.0 * std::numeric_limits<double>::epsilon();
    double umax = 0.0;
    for (const auto& fl : traj.fields) umax = std::max(umax, fl.max_abs());
    switch (selector) {
        case TimeSelector::u:
            for (std::size_t k = 0; k < traj.size(); ++k) f.push_back(traj.fields[k][node]);
            t = traj.times;
            noise *= std::max(umax, 1e-300);
            break;
        case TimeSelector::dt_u: {
            const Trajectory d = time_derivative(traj);
            for (std::size_t k = 1; k + 1 < d.size(); ++k) {
                f.push_back(d.fields[k][node]);
                t.push_back(d.times[k]);
            }
            noise *= std::max(umax, 1e-300) / (traj.times[1] - traj.times[0]);
            break;
        }
        case TimeSelector::fraclap_u: {
            if (!ops) throw ConfigError("time_exponent: fraclap_u needs an operator set");
            double fmax = 0.0;
            for (const auto& fl : traj.fields) {
                const Field l = ops->frac_laplacian(fl);
                f.push_back(l[node]);
                fmax = std::max(fmax, l.max_abs());
            }
            t = traj.times;
            noise *= std::max(fmax, 1e-300);
            break;
        }
    }
    const std::size_t m = f.size();
    const double step = t[1] - t[0];
    std::vector<double> taus;
    std::vector<double> mods;
    for (std::size_t lag = 1; 2 * lag < m; lag *= 2) {
        double mod = 0.0;
        for (std::size_t k = 0; k + lag < m; ++k) mod = std::max(mod, std::abs(f[k + lag] - f[k]));
        taus.push_back(lag * step);
        mods.push_back(mod);
    }
    if (mods.empty() || mods.front() < 10.0 * noise) throw NumericalError("time_exponent: unresolved");
    return fit_power_law(taus, mods);
}

double semiconvexity_constant(const Field& u) {
    const Grid& g = u.grid;
    const double h2 = g.h * g.h;
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto mi = g.multi_index(i);
        for (int axis = 0; axis < g.dim; ++axis) {
            auto p = mi;
            auto m = mi;
            p[axis] += 1;
            m[axis] -= 1;
            if (!g.contains_index(p[0], p[1]) || !g.contains_index(m[0], m[1])) continue;
            const double d2 = u[g.flat_index(p[0], p[1])] + u[g.flat_index(m[0], m[1])] - 2.0 * u[i];
            worst = std::max(worst, -d2 / h2);
        }
    }
    return worst;
}

MonotonicityCheck monotone_in_time_check(const Trajectory& traj, double tol) {
    if (traj.size() < 2) throw ConfigError("monotone_in_time_check: need at least two snapshots");
    MonotonicityCheck c;
    c.worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const Field& a = traj.fields[k];
        const Field& b = traj.fields[k + 1];
        for (std::size_t i = 0; i < a.size(); ++i) c.worst = std::min(c.worst, b[i] - a[i]);
    }
    c.pass = c.worst >= -tol;
    return c;
}

NestingCheck contact_nesting_check(const Trajectory& traj, const Field& psi, double tol) {
    if (traj.size() < 2) throw ConfigError("contact_nesting_check: need at least two snapshots");
    NestingCheck c;
    ContactMask prev = contact_set(traj.fields.front(), psi, tol);
    for (std::size_t k = 1; k < traj.size(); ++k) {
        ContactMask next = contact_set(traj.fields[k], psi, tol);
        std::size_t joined = 0;
        for (std::size_t i = 0; i < next.inside.size(); ++i) joined += next.inside[i] && !prev.inside[i];
        const double frac = static_cast<double>(joined) / static_cast<double>(next.inside.size());
        if (frac > c.worst_fraction) {
            c.worst_fraction = frac;
            c.worst_step = k;
        }
        prev = std::move(next);
    }
    return c;
}

SignStructure sign_structure_check(const Field& u, const ContactMask& mask, const OperatorSet& ops, double tol) {
    if (!(u.grid == mask.grid)) throw ConfigError("sign_structure_check: mask grid differs from field grid");
    SignStructure rep;
    rep.g = ops.frac_laplacian(u) - ops.lower_order(u);
    std::size_t bad_contact = 0;
    std::size_t bad_free = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (mask.inside[i]) {
            ++rep.contact_nodes;
            bad_contact += rep.g[i] < -tol;
        } else {
            ++rep.free_nodes;
            bad_free += rep.g[i] > tol;
        }
    }
    if (rep.contact_nodes) rep.contact_violation = static_cast<double>(bad_contact) / rep.contact_nodes;
    if (rep.free_nodes) rep.free_violation = static_cast<double>(bad_free) / rep.free_nodes;
    return rep;
}

double sign_structure_scale(const Field& psi, const OperatorSet& ops) {
    return (ops.frac_laplacian(psi) - ops.lower_order(psi)).max_abs();
}

Ladder exponent_ladder(double s, double alpha0, int k_max) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("exponent_ladder: s must lie in (0, 1)");
    Ladder l;
    l.fixed_point = (1.0 - s) / (2.0 * s);
    l.ratio = (1.0 - s) / (1.0 + s);
    if (!(alpha0 > 0.0 && alpha0 < l.fixed_point)) throw ConfigError("exponent_ladder: need 0 < alpha0 < (1-s)/(2s)");
    if (k_max < 0) throw ConfigError("exponent_ladder: k_max must be non-negative");
    l.alphas.push_back(alpha0);
    for (int k = 0; k < k_max; ++k) l.alphas.push_back((1.0 + l.alphas.back()) * l.ratio);
    return l;
}

AuxConstants aux_constants(double s, double sigma, double alpha, int n) {
    if (!(s > 0.5 && s < 1.0)) throw ConfigError("aux_constants: assumption 1/2 < s < 1 violated");
    if (!(sigma > 0.0 && sigma < s)) throw ConfigError("aux_constants: assumption 0 < sigma < s violated");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("aux_constants: alpha must lie in (0, 1)");
    if (n < 1) throw ConfigError("aux_constants: dimension must be positive");
    AuxConstants c;
    c.a = 1.0 - 2.0 * s;
    c.gamma = s - std::max(sigma, 0.5);
    c.delta = 0.25 * (alpha / (alpha + 2.0 * s) - 0.5 * alpha);
    c.eta = std::sqrt((1.0 + c.a) / (2.0 * n));
    return c;
}

LipschitzBounds lipschitz_bounds(const Trajectory& traj) {
    if (traj.size() < 2) throw ConfigError("lipschitz_bounds: need at least two snapshots");
    LipschitzBounds b;
    const Grid& g = traj.grid();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Field& u = traj.fields[k];
        if (k + 1 < traj.size()) {
            const double dt = traj.times[k + 1] - traj.times[k];
            const Field& v = traj.fields[k + 1];
            for (std::size_t i = 0; i < u.size(); ++i) b.sup_dt = std::max(b.sup_dt, std::abs(v[i] - u[i]) / dt);
        }
        for (std::size_t i = 0; i < u.size(); ++i) {
            const auto mi = g.multi_index(i);
            for (int axis = 0; axis < g.dim; ++axis) {
                auto p = mi;
                p[axis] += 1;
                if (!g.contains_index(p[0], p[1])) continue;
                b.sup_grad = std::max(b.sup_grad, std::abs(u[g.flat_index(p[0], p[1])] - u[i]) / g.h);
            }
        }
    }
    return b;
}

}  // namespace fracobstacle
