#include "fracobstacle/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracobstacle/error.hpp"
#include "fracobstacle/numerics.hpp"

namespace fracobstacle {

std::size_t Grid::size() const noexcept {
    return dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
}

Point Grid::node(std::size_t idx) const noexcept {
    const auto mi = multi_index(idx);
    return {coord(mi[0]), dim == 2 ? coord(mi[1]) : 0.0};
}

std::array<int, 2> Grid::multi_index(std::size_t idx) const noexcept {
    if (dim == 1) return {static_cast<int>(idx), 0};
    return {static_cast<int>(idx / n), static_cast<int>(idx % n)};
}

std::size_t Grid::flat_index(int i0, int i1) const noexcept {
    return dim == 1 ? static_cast<std::size_t>(i0) : static_cast<std::size_t>(i0) * n + i1;
}

bool Grid::contains_index(int i0, int i1) const noexcept {
    if (i0 < 0 || i0 >= n) return false;
    return dim == 1 || (i1 >= 0 && i1 < n);
}

std::size_t Grid::center() const noexcept { return flat_index(n / 2, n / 2); }

Grid build_grid(int dim, double half_width, int n, int min_points) {
    if (dim != 1 && dim != 2) throw ConfigError("grid: dimension must be 1 or 2");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("grid: half_width must be positive");
    if (n % 2 == 0) throw ConfigError("grid: n must be odd so that the origin is a node");
    if (n < min_points) throw ConfigError("grid: n must be at least " + std::to_string(min_points));
    Grid g;
    g.dim = dim;
    g.half_width = half_width;
    g.n = n;
    g.h = 2.0 * half_width / (n - 1);
    return g;
}

Field::Field(const Grid& g, double fill) : grid(g), values(g.size(), fill) {}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw ConfigError("field: value count does not match grid");
}

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

bool Field::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Field operator-(const Field& a, const Field& b) {
    Field r(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Field operator+(const Field& a, const Field& b) {
    Field r(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Field operator*(double alpha, const Field& a) {
    Field r(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = alpha * a[i];
    return r;
}

Field sample(const Grid& grid, const std::function<double(const Point&)>& f) {
    Field r(grid);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = f(grid.node(i));
    return r;
}

void Trajectory::push(double t, Field f) {
    if (!times.empty()) {
        if (!(t > times.back())) throw ConfigError("trajectory: times must increase strictly");
        if (!(f.grid == fields.front().grid)) throw ConfigError("trajectory: all fields must share one grid");
    }
    times.push_back(t);
    fields.push_back(std::move(f));
}

std::string to_string(ObstacleKind kind) {
    switch (kind) {
        case ObstacleKind::bump: return "bump";
        case ObstacleKind::gaussian: return "gaussian";
        case ObstacleKind::mollified_put: return "mollified_put";
        case ObstacleKind::tabulated: return "tabulated";
    }
    return "unknown";
}

ObstacleKind obstacle_kind_from_string(const std::string& name) {
    if (name == "bump") return ObstacleKind::bump;
    if (name == "gaussian") return ObstacleKind::gaussian;
    if (name == "mollified_put") return ObstacleKind::mollified_put;
    if (name == "tabulated") return ObstacleKind::tabulated;
    throw ConfigError("unknown obstacle kind '" + name + "'");
}

namespace {

double unnormalised_mollifier(double r) { return r < 1.0 ? std::exp(1.0 / (r * r - 1.0)) : 0.0; }

double mollifier_mass(int dim) {
    static const double mass1 = numerics::integrate_panels(unnormalised_mollifier, -1.0, 1.0, 8, 48);
    static const double mass2 = 2.0 * std::numbers::pi *
        numerics::integrate_panels([](double r) { return r * unnormalised_mollifier(r); }, 0.0, 1.0, 8, 48);
    return dim == 1 ? mass1 : mass2;
}

// int eta_delta(z) e^{z_1} dz for the radial mollifier of radius delta.
double exponential_moment(int dim, double delta) {
    if (dim == 1) {
        return numerics::integrate_panels(
            [&](double t) { return mollifier(std::abs(t), 1) * std::exp(delta * t); }, -1.0, 1.0, 8, 32);
    }
    return numerics::integrate_panels(
        [&](double r) {
            const double bessel_like = numerics::integrate_panels(
                [&](double th) { return std::exp(delta * r * std::cos(th)); }, 0.0, 2.0 * std::numbers::pi, 4, 16);
            return r * mollifier(r, 2) * bessel_like;
        },
        0.0, 1.0, 8, 24);
}

double put_payoff(const ObstacleSpec& s, const Point& x) {
    double m = std::exp(x[0]);
    if (s.dim == 2) m = 0.5 * (m + std::exp(x[1]));
    return std::max(s.strike - m, 0.0);
}

double mollified_put(const ObstacleSpec& s, const Point& x) {
    if (s.delta <= 0.0) return put_payoff(s, x);
    double m = std::exp(x[0]);
    double sum_exp = m;
    if (s.dim == 2) {
        sum_exp += std::exp(x[1]);
        m = 0.5 * sum_exp;
    }
    if (m * std::exp(s.delta) <= s.strike) {
        // payoff affine in e^{x_i} on the whole support of the mollifier
        static thread_local double cached_delta = -1.0;
        static thread_local int cached_dim = 0;
        static thread_local double cached_moment = 0.0;
        if (cached_delta != s.delta || cached_dim != s.dim) {
            cached_moment = exponential_moment(s.dim, s.delta);
            cached_delta = s.delta;
            cached_dim = s.dim;
        }
        return s.strike - m * cached_moment;
    }
    if (m * std::exp(-s.delta) >= s.strike) return 0.0;
    if (s.dim == 1) {
        const double kink = std::clamp(std::log(s.strike) - x[0], -s.delta, s.delta);
        auto integrand = [&](double z) {
            return mollifier(std::abs(z) / s.delta, 1) / s.delta * std::max(s.strike - std::exp(x[0] + z), 0.0);
        };
        return numerics::integrate(integrand, -s.delta, kink, 24) + numerics::integrate(integrand, kink, s.delta, 24);
    }
    return numerics::integrate(
        [&](double r) {
            const double ring = numerics::integrate_panels(
                [&](double th) {
                    const Point y{x[0] + s.delta * r * std::cos(th), x[1] + s.delta * r * std::sin(th)};
                    return put_payoff(s, y);
                },
                0.0, 2.0 * std::numbers::pi, 8, 12);
            return r * mollifier(r, 2) * ring;
        },
        0.0, 1.0, 24);
}

}  // namespace

double mollifier(double r, int dim) { return unnormalised_mollifier(r) / mollifier_mass(dim); }

void ObstacleSpec::validate() const {
    if (dim != 1 && dim != 2) throw ConfigError("obstacle: dimension must be 1 or 2");
    if (!(amplitude >= 0.0)) throw ConfigError("obstacle: amplitude must be nonnegative");
    if (!(offset >= 0.0)) throw ConfigError("obstacle: offset must be nonnegative (psi >= 0)");
    switch (kind) {
        case ObstacleKind::bump:
        case ObstacleKind::gaussian:
            if (!(scale > 0.0)) throw ConfigError("obstacle: scale must be positive");
            break;
        case ObstacleKind::mollified_put:
            if (!(strike > 0.0)) throw ConfigError("obstacle: strike must be positive");
            if (!(delta > 0.0)) throw ConfigError("obstacle: mollified_put needs a positive mollification radius");
            break;
        case ObstacleKind::tabulated:
            if (table.size() != table_grid.size()) throw ConfigError("obstacle: table size does not match its grid");
            for (double v : table) {
                if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("obstacle: tabulated values must be finite and >= 0");
            }
            break;
    }
}

double ObstacleSpec::evaluate(const Point& x) const {
    const double dx0 = x[0] - center[0];
    const double dx1 = dim == 2 ? x[1] - center[1] : 0.0;
    const double r2 = dx0 * dx0 + dx1 * dx1;
    switch (kind) {
        case ObstacleKind::bump: {
            const double t = std::max(0.0, 1.0 - r2 / (scale * scale));
            return amplitude * t * t * t + offset;
        }
        case ObstacleKind::gaussian:
            return amplitude * std::exp(-r2 / (2.0 * scale * scale)) + offset;
        case ObstacleKind::mollified_put:
            return amplitude * mollified_put(*this, x) + offset;
        case ObstacleKind::tabulated: {
            const Grid& g = table_grid;
            const double tol = 1e-9 * g.h;
            const double f0 = (x[0] + g.half_width) / g.h;
            const double f1 = dim == 2 ? (x[1] + g.half_width) / g.h : 0.0;
            const long i0 = std::lround(f0);
            const long i1 = std::lround(f1);
            const bool on_node = std::abs(f0 - i0) * g.h < tol && (dim == 1 || std::abs(f1 - i1) * g.h < tol);
            if (on_node && g.contains_index(static_cast<int>(i0), static_cast<int>(i1))) {
                return table[g.flat_index(static_cast<int>(i0), static_cast<int>(i1))] + offset;
            }
            return offset;
        }
    }
    return 0.0;
}

Field sample_obstacle(const ObstacleSpec& spec, const Grid& grid) {
    spec.validate();
    if (spec.dim != grid.dim) throw ConfigError("obstacle: dimension does not match grid");
    if (spec.kind == ObstacleKind::tabulated && !(spec.table_grid == grid)) {
        throw ConfigError("obstacle: tabulated obstacle defined on a different grid");
    }
    return sample(grid, [&](const Point& x) { return spec.evaluate(x); });
}

double far_field(const ObstacleSpec& spec, const Point& x) { return spec.evaluate(x); }

Mollified mollify(const ObstacleSpec& spec, const Grid& grid, double eps) {
    if (!(eps > 0.0)) throw ConfigError("mollify: eps must be positive");
    Field raw = sample_obstacle(spec, grid);
    if (eps < grid.h) return {std::move(raw), false};

    const int reach = static_cast<int>(std::floor(eps / grid.h));
    struct Tap {
        int k0, k1;
        double weight;
    };
    std::vector<Tap> taps;
    double mass = 0.0;
    const int reach1 = grid.dim == 2 ? reach : 0;
    for (int k0 = -reach; k0 <= reach; ++k0) {
        for (int k1 = -reach1; k1 <= reach1; ++k1) {
            const double r = std::hypot(k0 * grid.h, k1 * grid.h) / eps;
            const double w = mollifier(r, grid.dim);
            if (w > 0.0) {
                taps.push_back({k0, k1, w});
                mass += w;
            }
        }
    }
    Field out(grid);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const auto mi = grid.multi_index(idx);
        double acc = 0.0;
        for (const auto& t : taps) {
            const int j0 = mi[0] + t.k0;
            const int j1 = mi[1] + t.k1;
            double v;
            if (grid.contains_index(j0, j1)) {
                v = raw[grid.flat_index(j0, j1)];
            } else {
                v = spec.evaluate({grid.coord(j0), grid.dim == 2 ? grid.coord(j1) : 0.0});
            }
            acc += t.weight * v;
        }
        out[idx] = acc / mass;
    }
    return {std::move(out), true};
}

void write_field_csv(std::ostream& out, const Field& field) {
    out << (field.grid.dim == 1 ? "x0,value\n" : "x0,x1,value\n");
    out << std::setprecision(17);
    for (std::size_t i = 0; i < field.size(); ++i) {
        const Point x = field.grid.node(i);
        out << x[0] << ',';
        if (field.grid.dim == 2) out << x[1] << ',';
        out << field[i] << '\n';
    }
}

void write_field_csv(const std::string& path, const Field& field) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    write_field_csv(out, field);
}

Field read_field_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("field csv: empty input");
    int dim;
    if (line.rfind("x0,x1,value", 0) == 0) {
        dim = 2;
    } else if (line.rfind("x0,value", 0) == 0) {
        dim = 1;
    } else {
        throw ConfigError("field csv: unexpected header '" + line + "'");
    }
    std::vector<double> x0s, values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> cols;
        while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
        if (static_cast<int>(cols.size()) != dim + 1) throw ConfigError("field csv: wrong column count");
        x0s.push_back(cols[0]);
        values.push_back(cols.back());
    }
    const std::size_t count = values.size();
    const int n = dim == 1 ? static_cast<int>(count) : static_cast<int>(std::lround(std::sqrt(double(count))));
    if (n < 3 || (dim == 2 && static_cast<std::size_t>(n) * n != count)) throw ConfigError("field csv: not a square lattice");
    const double half_width = -x0s.front();
    Grid g = build_grid(dim, half_width, n, 3);
    return Field(g, std::move(values));
}

Field read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    return read_field_csv(in);
}

}  // namespace fracobstacle
