#include "fracobstacle/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracobstacle/error.hpp"
#include "fracobstacle/numerics.hpp"

namespace fracobstacle {

namespace {

constexpr double pi = std::numbers::pi;
constexpr std::size_t tail_cache_limit = 4'000'000;

double square_exit(double half_side, double theta) {
    return half_side / std::max(std::abs(std::cos(theta)), std::abs(std::sin(theta)));
}

void add_ray(QuadratureGeometry& g, const Point& dir, double start, double factor) {
    const auto& rule = numerics::gauss_legendre(g.config.radial_nodes);
    double lo = start;
    while (lo < g.tail_radius) {
        const double hi = std::min(2.0 * lo, g.tail_radius);
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double rho = mid + half * rule.nodes[q];
            g.tail.push_back({{rho * dir[0], rho * dir[1]}, rho, rule.weights[q] * half * factor, false});
        }
        lo = hi;
    }
    g.tail.push_back({{g.tail_radius * dir[0], g.tail_radius * dir[1]}, g.tail_radius, factor, true});
}

}  // namespace

void QuadratureConfig::validate() const {
    if (taylor_cells < 1 || taylor_cells % 2 == 0) throw ConfigError("quadrature: taylor_cells must be odd and >= 1");
    if (!(tail_radius_factor >= 4.0)) throw ConfigError("quadrature: tail_radius_factor must be >= 4");
    if (radial_nodes < 2) throw ConfigError("quadrature: radial_nodes must be >= 2");
    if (angular_nodes < 4 || angular_nodes % 4 != 0) throw ConfigError("quadrature: angular_nodes must be a positive multiple of 4");
    if (angular_sub < 1) throw ConfigError("quadrature: angular_sub must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("quadrature: tolerance must be positive");
}

double PowerKernel::value(double rho) const { return std::pow(rho, -dim() - 2.0 * order_); }

double PowerKernel::inner_moment(double radius, int p) const {
    const double e = p - 2.0 * order_;
    if (!(e > 0.0)) throw ConfigError("power kernel: moment of order p <= 2*sigma diverges");
    return std::pow(radius, e) / e;
}

double PowerKernel::outer_mass(double radius) const {
    return std::pow(radius, -2.0 * order_) / (2.0 * order_);
}

std::size_t QuadratureGeometry::ext_size() const noexcept {
    const auto w = static_cast<std::size_t>(ext_width);
    return grid.dim == 1 ? w : w * w;
}

long QuadratureGeometry::ext_index(std::size_t node) const noexcept {
    const auto mi = grid.multi_index(node);
    if (grid.dim == 1) return mi[0] + reach;
    return static_cast<long>(mi[0] + reach) * ext_width + (mi[1] + reach);
}

double QuadratureGeometry::block_radius(double theta) const noexcept {
    const double half_side = (block_half + 0.5) * grid.h;
    return grid.dim == 1 ? half_side : square_exit(half_side, theta);
}

QuadratureGeometry build_geometry(const Grid& grid, const QuadratureConfig& config, bool symmetric) {
    config.validate();
    QuadratureGeometry g;
    g.grid = grid;
    g.config = config;
    g.symmetric = symmetric;
    g.reach = grid.n - 1;
    g.block_half = (config.taylor_cells - 1) / 2;
    if (g.block_half >= g.reach) throw ConfigError("quadrature: Taylor block wider than the box");
    g.ext_width = grid.n + 2 * g.reach;
    g.tail_radius = config.tail_radius_factor * grid.half_width;
    const double h = grid.h;
    const double mult = symmetric ? 2.0 : 1.0;
    const double lattice_edge = (g.reach + 0.5) * h;

    if (grid.dim == 1) {
        for (int k = -g.reach; k <= g.reach; ++k) {
            if (std::abs(k) <= g.block_half || (symmetric && k < 0)) continue;
            g.offsets.push_back({{k, 0}, {k * h, 0.0}, k});
        }
        g.directions.push_back({{1.0, 0.0}, 0.0, mult});
        if (!symmetric) g.directions.push_back({{-1.0, 0.0}, pi, 1.0});
        for (const auto& d : g.directions) add_ray(g, d.dir, lattice_edge, d.measure);
        return g;
    }

    for (int k0 = -g.reach; k0 <= g.reach; ++k0) {
        for (int k1 = -g.reach; k1 <= g.reach; ++k1) {
            if (std::max(std::abs(k0), std::abs(k1)) <= g.block_half) continue;
            if (symmetric && !(k0 > 0 || (k0 == 0 && k1 > 0))) continue;
            g.offsets.push_back({{k0, k1}, {k0 * h, k1 * h}, static_cast<long>(k0) * g.ext_width + k1});
        }
    }
    const int cells = symmetric ? config.angular_nodes : 2 * config.angular_nodes;
    const double dtheta = (symmetric ? pi : 2.0 * pi) / cells;
    const auto& sub = numerics::gauss_legendre(config.angular_sub);
    const auto& fine = numerics::gauss_legendre(8);
    for (int c = 0; c < cells; ++c) {
        const double mid = (c + 0.5) * dtheta;
        for (std::size_t q = 0; q < fine.nodes.size(); ++q) {
            const double theta = mid + 0.5 * dtheta * fine.nodes[q];
            g.directions.push_back({{std::cos(theta), std::sin(theta)}, theta, mult * 0.5 * dtheta * fine.weights[q]});
        }
        for (std::size_t q = 0; q < sub.nodes.size(); ++q) {
            const double theta = mid + 0.5 * dtheta * sub.nodes[q];
            const Point dir{std::cos(theta), std::sin(theta)};
            add_ray(g, dir, square_exit(lattice_edge, theta), mult * 0.5 * dtheta * sub.weights[q]);
        }
    }
    return g;
}

QuadratureWeights compute_weights(const QuadratureGeometry& geom, const RadialKernel& kernel, int moment_power,
                                  const KernelProfile& profile) {
    if (kernel.dim() != geom.grid.dim) throw ConfigError("quadrature: kernel dimension does not match grid");
    const int p = moment_power;
    const int d = geom.grid.dim;
    const double h = geom.grid.h;
    const double mult = geom.symmetric ? 2.0 : 1.0;
    auto k = [&](const Point& y) { return profile ? profile(y) : 1.0; };
    QuadratureWeights w;
    w.moment_power = p;

    auto radial = [&](double rho) { return kernel.value(rho) * std::pow(rho, p); };
    w.lattice.reserve(geom.offsets.size());
    for (const auto& off : geom.offsets) {
        const int kmax = std::max(std::abs(off.k[0]), std::abs(off.k[1]));
        const int q = kmax <= geom.block_half + 4 ? 12 : 4;
        const auto& rule = numerics::gauss_legendre(q);
        double integral = 0.0;
        if (d == 1) {
            const double c = std::abs(off.y[0]);
            for (int a = 0; a < q; ++a) integral += rule.weights[a] * radial(c + 0.5 * h * rule.nodes[a]);
            integral *= 0.5 * h;
        } else {
            for (int a = 0; a < q; ++a) {
                const double z0 = off.y[0] + 0.5 * h * rule.nodes[a];
                for (int b = 0; b < q; ++b) {
                    const double z1 = off.y[1] + 0.5 * h * rule.nodes[b];
                    integral += rule.weights[a] * rule.weights[b] * radial(std::hypot(z0, z1));
                }
            }
            integral *= 0.25 * h * h;
        }
        const double norm = std::hypot(off.y[0], off.y[1]);
        w.lattice.push_back(mult * integral / std::pow(norm, p) * k(off.y));
    }

    w.block.reserve(geom.directions.size());
    for (const auto& dir : geom.directions) {
        const double radius = geom.block_radius(dir.theta);
        const Point mid{0.5 * radius * dir.dir[0], 0.5 * radius * dir.dir[1]};
        w.block.push_back(dir.measure * kernel.inner_moment(radius, p) * k(mid));
    }

    w.tail.reserve(geom.tail.size());
    for (const auto& node : geom.tail) {
        if (node.remainder) {
            const double m = node.measure * kernel.outer_mass(node.rho) * k(node.y);
            w.tail.push_back(m);
            w.remainder_mass += m;
        } else {
            w.tail.push_back(node.measure * kernel.value(node.rho) * std::pow(node.rho, d - 1) * k(node.y));
        }
    }
    return w;
}

double BoundaryValues::tail_value(const QuadratureGeometry& geom, std::size_t node, std::size_t j) const {
    if (zero) return 0.0;
    if (!tail.empty()) return tail[node * geom.tail.size() + j];
    const Point x = geom.grid.node(node);
    const Point& y = geom.tail[j].y;
    double v = far({x[0] + y[0], x[1] + y[1]});
    if (geom.symmetric) v += far({x[0] - y[0], x[1] - y[1]});
    return v;
}

BoundaryValues sample_boundary(const QuadratureGeometry& geom, const FarField& far) {
    BoundaryValues bv;
    if (!far) return bv;
    bv.zero = false;
    bv.far = far;
    const Grid& grid = geom.grid;
    const int w = geom.ext_width;
    bv.halo.assign(geom.ext_size(), 0.0);
    auto coord = [&](int e) { return -grid.half_width + (e - geom.reach) * grid.h; };
    auto inside = [&](int e) { return e >= geom.reach && e < geom.reach + grid.n; };
    if (grid.dim == 1) {
        for (int e = 0; e < w; ++e) {
            if (!inside(e)) bv.halo[e] = far({coord(e), 0.0});
        }
    } else {
        for (int e0 = 0; e0 < w; ++e0) {
            for (int e1 = 0; e1 < w; ++e1) {
                if (inside(e0) && inside(e1)) continue;
                bv.halo[static_cast<std::size_t>(e0) * w + e1] = far({coord(e0), coord(e1)});
            }
        }
    }
    const std::size_t nt = geom.tail.size();
    if (grid.size() * nt <= tail_cache_limit) {
        BoundaryValues lazy = bv;
        bv.tail.resize(grid.size() * nt);
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(grid.size()); ++i) {
            for (std::size_t j = 0; j < nt; ++j) bv.tail[i * nt + j] = lazy.tail_value(geom, i, j);
        }
    }
    return bv;
}

std::vector<double> tail_far_sum(const QuadratureGeometry& geom, const BoundaryValues& bv,
                                 const std::vector<double>& w) {
    std::vector<double> out(geom.grid.size(), 0.0);
    if (bv.zero) return out;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(out.size()); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * bv.tail_value(geom, i, j);
        out[i] = s;
    }
    return out;
}

std::vector<double> extend_lattice(const QuadratureGeometry& geom, const Field& u, const BoundaryValues& bv) {
    std::vector<double> ext = bv.halo.empty() ? std::vector<double>(geom.ext_size(), 0.0) : bv.halo;
    for (std::size_t i = 0; i < u.size(); ++i) ext[geom.ext_index(i)] = u[i];
    return ext;
}

Field apply_second_differences(const QuadratureGeometry& geom, const QuadratureWeights& w, const Field& u,
                               const BoundaryValues& bv, const std::vector<double>& far_sum) {
    if (!geom.symmetric || w.moment_power != 2) throw ConfigError("quadrature: second differences need symmetric p = 2 weights");
    if (!(u.grid == geom.grid)) throw ConfigError("quadrature: field grid does not match the layout");
    const auto e = extend_lattice(geom, u, bv);
    const Grid& g = geom.grid;
    const double h2 = g.h * g.h;
    const long E = geom.ext_width;
    double tail_sum = 0.0;
    for (double x : w.tail) tail_sum += x;
    Field out(g);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(g.size()); ++i) {
        const long c = geom.ext_index(i);
        const double ui = u[i];
        double acc = 0.0;
        for (std::size_t k = 0; k < geom.offsets.size(); ++k) {
            const long st = geom.offsets[k].stride;
            acc += w.lattice[k] * (e[c + st] + e[c - st] - 2.0 * ui);
        }
        if (g.dim == 1) {
            acc += w.block[0] * (e[c + 1] + e[c - 1] - 2.0 * ui) / h2;
        } else {
            const double h00 = (e[c + E] + e[c - E] - 2.0 * ui) / h2;
            const double h11 = (e[c + 1] + e[c - 1] - 2.0 * ui) / h2;
            const double h01 = (e[c + E + 1] + e[c - E - 1] - e[c + E - 1] - e[c - E + 1]) / (4.0 * h2);
            for (std::size_t j = 0; j < geom.directions.size(); ++j) {
                const Point& d = geom.directions[j].dir;
                acc += w.block[j] * (h00 * d[0] * d[0] + 2.0 * h01 * d[0] * d[1] + h11 * d[1] * d[1]);
            }
        }
        acc += (far_sum.empty() ? 0.0 : far_sum[i]) - 2.0 * ui * tail_sum;
        out[i] = acc;
    }
    return out;
}

}  // namespace fracobstacle
