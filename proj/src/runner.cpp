#include "fracobstacle/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "fracobstacle/error.hpp"
#include "fracobstacle/spectral_oracle.hpp"

namespace fracobstacle {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

std::string le(double tol) { return "<= " + fmt(tol); }
std::string ge(double tol) { return ">= " + fmt(tol); }
std::string within(double lo, double hi) { return "[" + fmt(lo) + ", " + fmt(hi) + "]"; }

std::filesystem::path prepare_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    return out;
}

Field gaussian(const Grid& g, double width = 1.0) {
    return sample(g, [width](const Point& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * width * width)); });
}

FarField gaussian_far(double width = 1.0) {
    return [width](const Point& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * width * width)); };
}

double rel_linf(const Field& a, const Field& ref, double radius) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const Point x = a.grid.node(i);
        if (std::hypot(x[0], x[1]) > radius) continue;
        num = std::max(num, std::abs(a[i] - ref[i]));
        den = std::max(den, std::abs(ref[i]));
    }
    return num / den;
}

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

class Selection {
public:
    explicit Selection(const AnalysisConfig& a) {
        for (const auto& d : a.diagnostics) on_.insert(d);
        for (const auto& d : a.report_only) {
            on_.insert(d);
            soft_.insert(d);
        }
    }
    [[nodiscard]] bool on(const std::string& name) const { return on_.contains(name); }
    [[nodiscard]] bool enforced(const std::string& name) const { return !soft_.contains(name); }

private:
    std::set<std::string> on_;
    std::set<std::string> soft_;
};

void add(std::vector<Diagnostic>& rows, const Selection& sel, const std::string& group, const std::string& quantity,
         double value, const std::string& band, const std::string& range, bool pass) {
    rows.push_back({quantity, value, band, range, pass, sel.enforced(group)});
}

double ladder_ratio_error(const Ladder& l) {
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < l.alphas.size(); ++j) {
        const double e = l.alphas[j] - l.fixed_point;
        if (std::abs(e) < 1e-3) break;
        worst = std::max(worst, std::abs((l.alphas[j + 1] - l.fixed_point) / e - l.ratio));
    }
    return worst;
}

struct SliceContext {
    std::size_t index = 0;
    Field u;
    ContactMask mask;
    std::size_t probe = 0;
};

SliceContext make_slice(const PenaltySolver& solver, const Trajectory& traj, double fraction) {
    SliceContext c;
    c.index = slice_index(traj, fraction);
    c.u = traj.fields[c.index];
    c.mask = contact_set(c.u, solver.psi(), contact_tolerance(solver.problem(), solver.config()));
    return c;
}

double eigen_target(double s) { return (1.0 - s) * (1.0 + s); }

constexpr int kEigenResolution = 256;

void write_summary(std::ostream& out, const std::vector<Diagnostic>& rows) {
    for (const auto& r : rows) {
        out << (r.pass ? "PASS " : "FAIL ") << r.quantity << " = " << std::setprecision(6) << r.value << " (band "
            << r.band << ", " << r.range << ")" << (r.enforced ? "" : " [report only]") << '\n';
    }
}

}  // namespace

void write_report_csv(std::ostream& out, const std::vector<Diagnostic>& rows) {
    out << std::setprecision(17);
    out << "quantity,value,band,range_used,pass\n";
    for (const auto& r : rows) {
        out << r.quantity << ',' << r.value << ',' << r.band << ',' << r.range << ',' << (r.pass ? "true" : "false")
            << '\n';
    }
}

bool all_enforced_pass(const std::vector<Diagnostic>& rows) {
    return std::all_of(rows.begin(), rows.end(), [](const Diagnostic& r) { return r.pass || !r.enforced; });
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    if (traj.size() == 0) throw ConfigError("write_trajectory_csv: empty trajectory");
    const Grid& g = traj.grid();
    out << std::setprecision(17);
    out << (g.dim == 1 ? "t,x,value\n" : "t,x0,x1,value\n");
    for (std::size_t k = 0; k < traj.size(); ++k) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Point x = g.node(i);
            out << traj.times[k] << ',' << x[0] << ',';
            if (g.dim == 2) out << x[1] << ',';
            out << traj.fields[k][i] << '\n';
        }
    }
}

Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("trajectory csv: empty input");
    int dim;
    if (line == "t,x,value") {
        dim = 1;
    } else if (line == "t,x0,x1,value") {
        dim = 2;
    } else {
        throw ConfigError("trajectory csv: unexpected header '" + line + "'");
    }
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(row, cell, ',')) {
            try {
                cells.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("trajectory csv: bad number '" + cell + "'");
            }
        }
        if (static_cast<int>(cells.size()) != dim + 2) throw ConfigError("trajectory csv: wrong column count");
        if (times.empty() || cells[0] != times.back()) {
            times.push_back(cells[0]);
            values.emplace_back();
        }
        x_min = std::min(x_min, cells[1]);
        x_max = std::max(x_max, cells[1]);
        values.back().push_back(cells.back());
    }
    if (times.empty()) throw ConfigError("trajectory csv: no rows");
    const std::size_t count = values.front().size();
    const int n = static_cast<int>(std::lround(dim == 1 ? count : std::sqrt(static_cast<double>(count))));
    const Grid g = build_grid(dim, 0.5 * (x_max - x_min), n, 3);
    Trajectory traj;
    traj.dt = times.size() > 1 ? times[1] - times[0] : 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (values[k].size() != g.size()) throw ConfigError("trajectory csv: snapshots differ in size");
        traj.push(times[k], Field(g, std::move(values[k])));
    }
    return traj;
}

SymbolStudy symbol_study(double s, int n, double half_width, const QuadratureConfig& quad) {
    const auto start = Clock::now();
    const Grid g = build_grid(1, half_width, n);
    OperatorParams p;
    p.s = s;
    p.sigma = std::min(0.3, 0.5 * s);
    const Field u = gaussian(g);
    const Field quadrature = frac_laplacian(u, p, quad, gaussian_far());
    SymbolStudy out;
    out.runtime_s = seconds_since(start);
    const Field oracle = from_periodic(dft_frac_laplacian(to_periodic(u), s));
    out.rel_linf = rel_linf(quadrature, oracle, 4.0);
    return out;
}

SandwichStudy sandwich_study(const Problem& problem, int pairs, std::uint64_t seed) {
    if (pairs < 1) throw ConfigError("sandwich_study: need at least one pair");
    const auto start = Clock::now();
    const Grid& g = problem.grid;
    const OperatorSet ops(g, problem.params, problem.quad, [](const Point&) { return 0.0; });
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(-0.5 * g.half_width, 0.5 * g.half_width);
    std::uniform_real_distribution<double> width(0.1 * g.half_width, 0.25 * g.half_width);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    auto draw = [&] {
        struct Bump {
            Point c;
            double w, a;
        };
        std::vector<Bump> bumps;
        for (int k = 0; k < 3; ++k) {
            Bump b{{centre(rng), g.dim == 2 ? centre(rng) : 0.0}, width(rng), amp(rng)};
            bumps.push_back(b);
        }
        return sample(g, [bumps](const Point& x) {
            double v = 0.0;
            for (const auto& b : bumps) {
                const double r2 = std::pow(x[0] - b.c[0], 2) + std::pow(x[1] - b.c[1], 2);
                v += b.a * std::exp(-r2 / (2.0 * b.w * b.w));
            }
            return v;
        });
    };
    SandwichStudy out;
    for (int k = 0; k < pairs; ++k) {
        const Field u = draw();
        const Field v = draw();
        out.worst = std::max(out.worst, ops.sandwich_check(u, v).worst());
        ++out.pairs;
    }
    out.runtime_s = seconds_since(start);
    return out;
}

PenaltySweep penalty_sweep(const Problem& problem, const PenaltyConfig& base, const std::vector<double>& eps) {
    if (eps.empty()) throw ConfigError("penalty_sweep: empty eps list");
    PenaltySweep out;
    PenaltyConfig ref = base;
    ref.scheme = Scheme::projected;
    ref.snapshot_every = 1;
    ref.dt = base.T / 64.0;
    const auto start = Clock::now();
    const PenaltySolver reference(problem, ref);
    const Field u_ref = reference.solve_projected().trajectory.fields.back();
    out.reference_runtime_s = seconds_since(start);
    out.psi_norm = reference.psi().max_abs();
    for (double e : eps) {
        PenaltyConfig c = base;
        c.scheme = Scheme::imex;
        c.eps = e;
        c.snapshot_every = 1;
        const SolveReport rep = PenaltySolver(problem, c).solve_penalized();
        out.entries.push_back({e, max_abs_diff(rep.trajectory.fields.back(), u_ref), rep.max_beta, rep.runtime_s});
    }
    return out;
}

FluxStudy flux_study(double s, int n, double half_width, int levels, const QuadratureConfig& quad) {
    const auto start = Clock::now();
    const Grid g = build_grid(1, half_width, n);
    const Field u = gaussian(g);
    ExtensionParams ep;
    ep.s = s;
    ep.M = levels;
    ep.quad = quad;
    const FluxReport rep = normal_flux_report(extend(u, ep, gaussian_far()));
    OperatorParams p;
    p.s = s;
    p.sigma = std::min(0.3, 0.5 * s);
    const Field direct = frac_laplacian(u, p, quad, gaussian_far());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::abs(g.node(i)[0]) > 0.5 * half_width) continue;
        num += std::pow(rep.flux[i] - direct[i], 2);
        den += direct[i] * direct[i];
    }
    FluxStudy out;
    out.rel_l2 = std::sqrt(num / den);
    out.flagged = rep.flagged.size();
    out.runtime_s = seconds_since(start);
    return out;
}

std::size_t slice_index(const Trajectory& traj, double fraction) {
    if (traj.size() == 0) throw ConfigError("slice_index: empty trajectory");
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("slice_index: fraction must lie in [0, 1]");
    return static_cast<std::size_t>(std::lround(fraction * static_cast<double>(traj.size() - 1)));
}

double contact_tolerance(const Problem& problem, const PenaltyConfig& config) {
    return config.scheme == Scheme::projected ? projected_contact_tol(problem.grid, problem.params.s)
                                              : penalized_contact_tol(config.eps);
}

std::size_t continuation_node(const ContactMask& mask, std::size_t probe, int cells) {
    const Grid& g = mask.grid;
    const auto mi = g.multi_index(probe);
    for (int axis = 0; axis < g.dim; ++axis) {
        for (int sgn : {-1, 1}) {
            auto m = mi;
            m[axis] += sgn;
            if (!g.contains_index(m[0], m[1]) || mask.inside[g.flat_index(m[0], m[1])]) continue;
            m[axis] = mi[axis] + sgn * cells;
            if (!g.contains_index(m[0], m[1])) continue;
            return g.flat_index(m[0], m[1]);
        }
    }
    throw ConfigError("continuation_node: no unmasked neighbour inside the box");
}

std::vector<double> decay_radii(const Grid& grid) { return dyadic_radii(8.0 * grid.h, 0.25 * grid.half_width); }

std::vector<double> phi_radii(const ExtensionField& ext_w) {
    const Grid& g = ext_w.grid;
    double rmax = std::min({1.0, g.half_width, ext_w.y.back()});
    for (int k = 0; k < g.dim; ++k) rmax = std::min(rmax, g.half_width - std::abs(ext_w.origin[k]));
    if (rmax < 8.0 * g.h) throw ConfigError("phi_radii: free boundary too close to the box edge");
    return dyadic_radii(8.0 * g.h, rmax);
}

std::vector<Diagnostic> analyze(const RunConfig& config, const PenaltySolver& solver, const Trajectory& traj) {
    if (traj.size() < 2) throw ConfigError("analyze: need at least two snapshots");
    if (!(traj.grid() == solver.problem().grid)) throw ConfigError("analyze: trajectory grid differs from the config");
    const Selection sel(config.analysis);
    const Problem& pb = solver.problem();
    const double s = pb.params.s;
    const Grid& g = pb.grid;
    const OperatorSet& ops = solver.operators();
    std::vector<Diagnostic> rows;

    const bool needs_slice = sel.on("sign_structure") || sel.on("decay") || sel.on("monotonicity_formula") ||
                             sel.on("time_exponent") || sel.on("semiconvexity") || sel.on("holder") ||
                             sel.on("vtilde") || sel.on("convex_hull");
    SliceContext sc;
    if (needs_slice) sc = make_slice(solver, traj, config.analysis.slice);
    if (sel.on("decay") || sel.on("time_exponent") || sel.on("vtilde") || sel.on("monotonicity_formula") ||
        sel.on("convex_hull")) {
        sc.probe = probe_point(sc.mask);
    }
    const std::string slice_range = "t = " + fmt(traj.times[sc.index]);

    if (sel.on("time_monotonicity")) {
        const double tol = 5.0 * traj.dt * solver.config().eps;
        const auto mono = monotone_in_time_check(traj, tol);
        add(rows, sel, "time_monotonicity", "time_monotonicity_worst", mono.worst, ge(-tol), "all steps", mono.pass);
        const auto nest = contact_nesting_check(traj, solver.psi(), contact_tolerance(pb, solver.config()));
        add(rows, sel, "time_monotonicity", "contact_nesting_fraction", nest.worst_fraction, le(0.01), "all steps",
            nest.worst_fraction <= 0.01);
    }
    if (sel.on("lipschitz")) {
        const auto lb = lipschitz_bounds(traj);
        add(rows, sel, "lipschitz", "sup_dt_u", lb.sup_dt, "finite", "all steps", std::isfinite(lb.sup_dt));
        add(rows, sel, "lipschitz", "sup_grad_u", lb.sup_grad, "finite", "all steps", std::isfinite(lb.sup_grad));
    }
    if (sel.on("sign_structure")) {
        const double tol = 5e-2 * sign_structure_scale(solver.psi(), ops);
        const auto ss = sign_structure_check(sc.u, sc.mask, ops, tol);
        add(rows, sel, "sign_structure", "sign_contact_violation", ss.contact_violation, le(0.02), slice_range,
            ss.contact_violation <= 0.02);
        add(rows, sel, "sign_structure", "sign_free_violation", ss.free_violation, le(0.02), slice_range,
            ss.free_violation <= 0.02);
    }
    if (sel.on("decay")) {
        const auto fit = decay_exponent(sc.u, solver.psi(), sc.probe, decay_radii(g));
        const std::string range = "r in " + within(fit.abscissae.back(), fit.abscissae.front()) + " " + slice_range;
        add(rows, sel, "decay", "kappa_space", fit.kappa, within(1.0 + s - 0.2, 1.0 + s + 0.2), range,
            std::abs(fit.kappa - (1.0 + s)) <= 0.2);
        add(rows, sel, "decay", "kappa_space_band", fit.band, "reported", range, true);
    }
    if (sel.on("time_exponent")) {
        const std::size_t node = continuation_node(sc.mask, sc.probe, 2);
        const auto fit = time_exponent(traj, node, TimeSelector::dt_u);
        const double target = (1.0 - s) / (2.0 * s) - 0.15;
        const std::string range = "tau in " + within(fit.abscissae.front(), fit.abscissae.back()) + " x = " +
                                  fmt(g.node(node)[0]);
        add(rows, sel, "time_exponent", "kappa_time", fit.kappa, ge(target), range, fit.kappa >= target);
    }
    if (sel.on("ladder")) {
        const Ladder l = exponent_ladder(s, 0.5 * (1.0 - s) / (2.0 * s), 80);
        const double err = ladder_ratio_error(l);
        add(rows, sel, "ladder", "ladder_ratio_error", err, le(1e-12), "80 steps", err <= 1e-12);
        const double gap = std::abs(l.alphas.back() - l.fixed_point);
        add(rows, sel, "ladder", "ladder_limit_gap", gap, le(1e-14), "80 steps", gap <= 1e-14);
    }
    if (sel.on("semiconvexity")) {
        const double c0 = semiconvexity_constant(sc.u);
        add(rows, sel, "semiconvexity", "semiconvexity_C0", c0, "finite", slice_range, std::isfinite(c0));
    }
    if (sel.on("holder")) {
        const double gamma = std::max(pb.params.gamma(), 0.05);
        const double hr = holder_seminorm(ops.lower_order(sc.u), gamma, 0.25 * g.half_width);
        add(rows, sel, "holder", "holder_Ru", hr, "finite", "gamma = " + fmt(gamma) + " " + slice_range,
            std::isfinite(hr));
    }
    if (sel.on("vtilde")) {
        ExtensionParams ep = config.extension_params();
        ExtensionField ext = extend(sc.u, ep, [spec = pb.obstacle](const Point& x) { return far_field(spec, x); });
        ext.origin = g.node(sc.probe);
        const double gamma = std::max(pb.params.gamma(), 0.05);
        const Field ru = ops.lower_order(sc.u);
        const double c0 = semiconvexity_constant(sc.u);
        const double c1 = holder_seminorm(ru, gamma, 0.25 * g.half_width);
        const auto rep = vtilde_bounds_check(ext, solver.psi(), sc.mask, ru[sc.probe], c0, c1, gamma);
        add(rows, sel, "vtilde", "vtilde_worst_ratio", rep.worst_ratio, le(1.2), slice_range, rep.worst_ratio <= 1.2);
    }
    if (sel.on("monotonicity_formula") || sel.on("convex_hull")) {
        const double alpha = (1.0 - s) / (2.0 * s);
        const WField w = build_w(sc.u, ops, sc.mask, sc.probe, config.extension_params(),
                                 contact_tolerance(pb, solver.config()));
        const auto radii = phi_radii(w.extension);
        const std::string range = "r in " + within(radii.back(), radii.front());
        if (sel.on("monotonicity_formula")) {
            const auto rep = monotonicity_report(w.extension, radii, alpha);
            add(rows, sel, "monotonicity_formula", "phi_worst_ratio", rep.worst_ratio, le(rep.multiplier), range,
                rep.pass());
            add(rows, sel, "monotonicity_formula", "w_clipped_nodes", static_cast<double>(w.boundary.clipped),
                "reported", slice_range, true);
        }
        if (sel.on("convex_hull")) {
            const double delta = 0.25 * (alpha / (alpha + 2.0 * s) - 0.5 * alpha);
            std::size_t excluded = 0;
            for (double r : radii) excluded += convex_hull_check(w.boundary, g.node(sc.probe), r, alpha, delta) ? 1 : 0;
            const double share = static_cast<double>(excluded) / static_cast<double>(radii.size());
            add(rows, sel, "convex_hull", "hull_excludes_origin_share", share, "reported", range, true);
        }
    }
    return rows;
}

int command_validate_ops(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
    const auto dir = prepare_dir(out_dir);
    const Problem pb = config.problem();
    const Grid& g = pb.grid;
    const OperatorSet ops(g, pb.params, pb.quad, [spec = pb.obstacle](const Point& x) { return far_field(spec, x); });
    struct Row {
        std::string op, test;
        double error, tol;
    };
    std::vector<Row> rows;
    const auto sym = symbol_study(pb.params.s, 513, 16.0, pb.quad);
    rows.push_back({"frac_laplacian", "dft_symbol_gaussian", sym.rel_linf, 2e-2});

    const Field psi = sample_obstacle(pb.obstacle, g);
    const Field a1 = ops.frac_laplacian(psi, true);
    const Field a2 = ops.frac_laplacian(2.0 * psi, true);
    rows.push_back({"frac_laplacian", "linearity", max_abs_diff(a2, 2.0 * a1) / std::max(1.0, a1.max_abs()), 1e-12});

    const Field even = gaussian(g, 0.15 * g.half_width);
    const Field ae = ops.frac_laplacian(even, true);
    double asym = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) asym = std::max(asym, std::abs(ae[i] - ae[g.size() - 1 - i]));
    rows.push_back({"frac_laplacian", "even_symmetry", asym / std::max(1.0, ae.max_abs()), 1e-10});

    const auto sw = sandwich_study(pb, 10, config.seed);
    rows.push_back({"i_apply", "extremal_sandwich", sw.worst, 1e-8});

    auto out = open_out(dir / "validate_ops.csv");
    out << std::setprecision(17) << "operator,test,error,tolerance,pass\n";
    bool ok = true;
    for (const auto& r : rows) {
        const bool pass = r.error <= r.tol;
        ok = ok && pass;
        out << r.op << ',' << r.test << ',' << r.error << ',' << r.tol << ',' << (pass ? "true" : "false") << '\n';
        log << (pass ? "PASS " : "FAIL ") << r.op << ' ' << r.test << " error " << r.error << " tolerance " << r.tol
            << '\n';
    }
    return ok ? 0 : 1;
}

namespace {

SolveReport solve_and_write(const PenaltySolver& solver, const std::filesystem::path& dir, std::ostream& log) {
    SolveReport rep = solver.solve();
    {
        auto out = open_out(dir / "trajectory.csv");
        write_trajectory_csv(out, rep.trajectory);
    }
    write_field_csv((dir / "u_final.csv").string(), rep.trajectory.fields.back());
    auto out = open_out(dir / "report.txt");
    out << std::setprecision(17);
    out << "scheme = " << to_string(solver.config().scheme) << '\n'
        << "steps = " << rep.steps << '\n'
        << "snapshots = " << rep.trajectory.size() << '\n'
        << "max_beta = " << rep.max_beta << '\n'
        << "min_slack = " << rep.min_slack << '\n'
        << "monotonicity_violation = " << rep.monotonicity_violation << '\n'
        << "cfl_margin = " << rep.cfl_margin << '\n'
        << "tail_bound = " << rep.tail_bound << '\n'
        << "tail_warning = " << (rep.tail_warning ? "true" : "false") << '\n'
        << "runtime_s = " << rep.runtime_s << '\n';
    log << "solve: " << rep.steps << " steps, " << rep.trajectory.size() << " snapshots, max_beta " << rep.max_beta
        << ", runtime " << fmt(rep.runtime_s, 3) << " s\n";
    if (rep.tail_warning) log << "warning: tail remainder bound " << rep.tail_bound << " above tolerance\n";
    return rep;
}

std::vector<Diagnostic> sweep_rows(const RunConfig& config, const Selection& sel, std::ostream* csv) {
    std::vector<double> eps = config.analysis.eps_sweep;
    if (eps.empty()) eps = {0.1, 0.05, 0.025};
    const PenaltySweep sw = penalty_sweep(config.problem(), config.solver, eps);
    if (csv) {
        *csv << std::setprecision(17) << "eps,distance,max_beta\n";
        for (const auto& e : sw.entries) *csv << e.eps << ',' << e.distance << ',' << e.max_beta << '\n';
    }
    std::vector<Diagnostic> rows;
    const std::string range = "eps in " + within(eps.back(), eps.front());
    bool decreasing = true;
    for (std::size_t k = 1; k < sw.entries.size(); ++k) decreasing = decreasing && sw.entries[k].distance < sw.entries[k - 1].distance;
    const double final_rel = sw.entries.back().distance / sw.psi_norm;
    if (sel.on("penalization")) {
        add(rows, sel, "penalization", "penalization_strictly_decreasing", decreasing ? 1.0 : 0.0, "== 1", range,
            decreasing);
        add(rows, sel, "penalization", "penalization_final_distance_rel", final_rel, le(0.05), range, final_rel <= 0.05);
    }
    if (sel.on("penalty_bound")) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const auto& e : sw.entries) {
            lo = std::min(lo, e.max_beta);
            hi = std::max(hi, e.max_beta);
        }
        const double var = (hi - lo) / lo;
        add(rows, sel, "penalty_bound", "penalty_bound_variation", var, le(0.2), range, var <= 0.2);
    }
    return rows;
}

std::vector<Diagnostic> run_level_rows(const RunConfig& config, const Selection& sel) {
    std::vector<Diagnostic> rows;
    const Problem pb = config.problem();
    const double s = pb.params.s;
    if (sel.on("operator_symbol")) {
        const auto st = symbol_study(s, 513, 16.0, pb.quad);
        add(rows, sel, "operator_symbol", "symbol_rel_linf", st.rel_linf, le(2e-2), "|x| <= 4, N = 513, L = 16",
            st.rel_linf <= 2e-2);
    }
    if (sel.on("sandwich")) {
        const auto sw = sandwich_study(pb, 50, config.seed);
        add(rows, sel, "sandwich", "sandwich_worst", sw.worst, le(1e-8), "50 pairs", sw.worst <= 1e-8);
    }
    if (sel.on("penalization") || sel.on("penalty_bound")) {
        auto more = sweep_rows(config, sel, nullptr);
        rows.insert(rows.end(), more.begin(), more.end());
    }
    if (sel.on("obstacle_sign_structure")) {
        PenaltyConfig pc = config.solver;
        pc.scheme = Scheme::projected;
        pc.dt = pc.T / 64.0;
        pc.snapshot_every = 1;
        const PenaltySolver ref(pb, pc);
        const Trajectory traj = ref.solve_projected().trajectory;
        const SliceContext sc = make_slice(ref, traj, config.analysis.slice);
        const double tol = 5e-2 * sign_structure_scale(ref.psi(), ref.operators());
        const auto ss = sign_structure_check(sc.u, sc.mask, ref.operators(), tol);
        const std::string range = "projected t = " + fmt(traj.times[sc.index]);
        add(rows, sel, "obstacle_sign_structure", "obstacle_sign_contact_violation", ss.contact_violation, le(0.02),
            range, ss.contact_violation <= 0.02);
        add(rows, sel, "obstacle_sign_structure", "obstacle_sign_free_violation", ss.free_violation, le(0.02), range,
            ss.free_violation <= 0.02);
    }
    if (sel.on("comparison")) {
        Problem shifted = pb;
        shifted.obstacle.offset += config.analysis.comparison_shift;
        const auto rep = comparison_run(pb, shifted, config.solver);
        add(rows, sel, "comparison", "comparison_violation", rep.max_violation, le(5e-3),
            "shift " + fmt(config.analysis.comparison_shift), rep.max_violation <= 5e-3);
    }
    if (sel.on("picard")) {
        PenaltyConfig pc = config.solver;
        pc.scheme = Scheme::picard;
        const auto rep = PenaltySolver(pb, pc).picard_solve();
        double worst = 0.0;
        for (std::size_t k = 3; k < rep.residuals.size(); ++k) {
            if (rep.residuals[k - 1] > 0.0) worst = std::max(worst, rep.residuals[k] / rep.residuals[k - 1]);
        }
        add(rows, sel, "picard", "picard_max_ratio", worst, "< 1", "k >= 3", worst < 1.0);
        add(rows, sel, "picard", "picard_plug_back", rep.plug_back_residual, le(10.0 * pc.picard_tol),
            fmt(static_cast<double>(rep.residuals.size())) + " iterations", rep.plug_back_residual <= 10.0 * pc.picard_tol);
    }
    if (sel.on("flux_identity")) {
        const auto fs = flux_study(s, 257, 8.0, config.analysis.extension_levels, pb.quad);
        add(rows, sel, "flux_identity", "flux_rel_l2", fs.rel_l2, le(5e-2), "|x| <= 4, N = 257, L = 8",
            fs.rel_l2 <= 5e-2);
    }
    if (sel.on("eigenvalue")) {
        const double q = halfsphere_rayleigh(2, s, kEigenResolution);
        const double rel = std::abs(q - eigen_target(s)) / eigen_target(s);
        add(rows, sel, "eigenvalue", "halfsphere_rel_error", rel, le(1e-2), "n = 2", rel <= 1e-2);
    }
    return rows;
}

int finish(const std::vector<Diagnostic>& rows, const std::filesystem::path& dir, std::ostream& log) {
    {
        auto out = open_out(dir / "regularity_report.csv");
        write_report_csv(out, rows);
    }
    auto out = open_out(dir / "summary.txt");
    write_summary(out, rows);
    write_summary(log, rows);
    return all_enforced_pass(rows) ? 0 : 1;
}

}  // namespace

int command_solve(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
    config.validate();
    const auto dir = prepare_dir(out_dir);
    const PenaltySolver solver(config.problem(), config.solver);
    solve_and_write(solver, dir, log);
    return 0;
}

int command_analyze(const RunConfig& config, const std::string& trajectory_csv, const std::string& out_dir,
                    std::ostream& log) {
    config.validate();
    std::ifstream in(trajectory_csv);
    if (!in) throw ConfigError("cannot read trajectory '" + trajectory_csv + "'");
    const Trajectory traj = read_trajectory_csv(in);
    const auto dir = prepare_dir(out_dir);
    const PenaltySolver solver(config.problem(), config.solver);
    return finish(analyze(config, solver, traj), dir, log);
}

int command_extend(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
    config.validate();
    const auto dir = prepare_dir(out_dir);
    const Problem pb = config.problem();
    const PenaltySolver solver(pb, config.solver);
    const SolveReport rep = solver.solve();
    SliceContext sc = make_slice(solver, rep.trajectory, config.analysis.slice);
    sc.probe = probe_point(sc.mask);
    const ExtensionParams ep = config.extension_params();

    ExtensionField ext = extend(sc.u, ep, [spec = pb.obstacle](const Point& x) { return far_field(spec, x); });
    ext.origin = pb.grid.node(sc.probe);
    {
        auto out = open_out(dir / "extension.csv");
        write_extension_csv(out, ext);
    }
    const double r_origin = solver.operators().lower_order(sc.u)[sc.probe];
    const auto decay = flux_decay_profile(ext, solver.psi(), r_origin, 4);
    {
        auto out = open_out(dir / "flux_decay.csv");
        out << std::setprecision(17) << "k,r,inf_flux\n";
        for (std::size_t k = 0; k < decay.size(); ++k) out << k << ',' << std::pow(4.0, -double(k)) << ',' << decay[k] << '\n';
    }

    const WField w = build_w(sc.u, solver.operators(), sc.mask, sc.probe, ep, contact_tolerance(pb, config.solver));
    {
        auto out = open_out(dir / "w_extension.csv");
        write_extension_csv(out, w.extension);
    }
    const double s = pb.params.s;
    const auto mono = monotonicity_report(w.extension, phi_radii(w.extension), (1.0 - s) / (2.0 * s));
    {
        auto out = open_out(dir / "monotonicity.csv");
        write_monotonicity_csv(out, mono);
    }
    log << "extend: origin x = " << fmt(ext.origin[0]) << ", w clipped nodes " << w.boundary.clipped
        << ", phi worst ratio " << fmt(mono.worst_ratio) << " (band " << le(mono.multiplier) << ")\n";
    return mono.pass() ? 0 : 1;
}

int command_eigcheck(const std::vector<double>& s_values, int resolution, const std::string& out_dir, std::ostream& log) {
    if (s_values.empty()) throw ConfigError("eigcheck: no s values");
    const auto dir = prepare_dir(out_dir);
    auto out = open_out(dir / "eigcheck.csv");
    out << std::setprecision(17) << "s,n,rayleigh,target,rel_error,tolerance,pass\n";
    bool ok = true;
    for (double s : s_values) {
        const double q = halfsphere_rayleigh(2, s, resolution);
        const double rel = std::abs(q - eigen_target(s)) / eigen_target(s);
        const bool pass = rel <= 1e-2;
        ok = ok && pass;
        out << s << ",2," << q << ',' << eigen_target(s) << ',' << rel << ",0.01," << (pass ? "true" : "false") << '\n';
        log << (pass ? "PASS " : "FAIL ") << "s = " << s << " rayleigh " << fmt(q, 8) << " target "
            << fmt(eigen_target(s), 8) << '\n';
    }
    return ok ? 0 : 1;
}

namespace {

// Implicit Euler on the quadrature operator against the exact semigroup.
double heat_error(double s, double dt, double T) {
    const Grid g = build_grid(1, 16.0, 513);
    OperatorParams p;
    p.s = s;
    p.sigma = std::min(0.3, 0.5 * s);
    const OperatorSet ops(g, p, QuadratureConfig{}, gaussian_far());
    const ImplicitSolver solver(ops, dt);
    const Field far_part = ops.frac_laplacian(Field(g));
    Field u = gaussian(g);
    const int steps = static_cast<int>(std::lround(T / dt));
    for (int n = 0; n < steps; ++n) u = solver.solve(u - dt * far_part);
    const Field exact = from_periodic(heat_evolve(to_periodic(gaussian(g)), T, s));
    return rel_linf(u, exact, 4.0);
}

// u = e^{-t} cos(2x) on [-pi, pi) driven by its own source.
double duhamel_error(double s, double dt) {
    const int n = 64;
    const double T = 1.0;
    const double lam = std::pow(2.0, 2.0 * s);
    PeriodicField base;
    base.dim = 1;
    base.half_width = std::numbers::pi;
    base.n = n;
    base.values.resize(n);
    for (int i = 0; i < n; ++i) base.values[i] = std::cos(2.0 * base.coord(i));
    const int steps = static_cast<int>(std::lround(T / dt));
    std::vector<PeriodicField> src;
    for (int k = 0; k <= steps; ++k) {
        PeriodicField f = base;
        for (double& v : f.values) v *= (lam - 1.0) * std::exp(-k * dt);
        src.push_back(std::move(f));
    }
    const Trajectory traj = duhamel_solve(base, src, dt, T, s);
    const Field& last = traj.fields.back();
    double err = 0.0;
    for (std::size_t i = 0; i < last.size(); ++i) {
        err = std::max(err, std::abs(last[i] - std::exp(-T) * std::cos(2.0 * last.grid.node(i)[0])));
    }
    return err / std::exp(-T);
}

}  // namespace

int command_oracle(const std::string& check, const std::string& out_dir, std::ostream& log) {
    const auto dir = prepare_dir(out_dir);
    bool ok = true;
    if (check == "symbol") {
        auto out = open_out(dir / "oracle_symbol.csv");
        out << std::setprecision(17) << "s,n,half_width,rel_linf,tolerance,pass\n";
        for (double s : {0.6, 0.75, 0.9}) {
            const auto st = symbol_study(s, 513, 16.0, QuadratureConfig{});
            const bool pass = st.rel_linf <= 2e-2;
            ok = ok && pass;
            out << s << ",513,16," << st.rel_linf << ",0.02," << (pass ? "true" : "false") << '\n';
            log << (pass ? "PASS " : "FAIL ") << "symbol s = " << s << " rel_linf " << fmt(st.rel_linf) << '\n';
        }
    } else if (check == "heat") {
        auto out = open_out(dir / "oracle_heat.csv");
        out << std::setprecision(17) << "s,dt,rel_linf,ratio\n";
        for (double s : {0.6, 0.75, 0.9}) {
            double prev = 0.0;
            for (double dt : {0.02, 0.01, 0.005}) {
                const double e = heat_error(s, dt, 0.2);
                const double ratio = prev > 0.0 ? prev / e : 0.0;
                out << s << ',' << dt << ',' << e << ',' << ratio << '\n';
                log << "heat s = " << s << " dt = " << dt << " rel_linf " << fmt(e) << '\n';
                if (prev > 0.0 && !(e < prev)) ok = false;
                prev = e;
            }
            if (prev > 2e-2) ok = false;
        }
    } else if (check == "duhamel") {
        auto out = open_out(dir / "oracle_duhamel.csv");
        out << std::setprecision(17) << "s,dt,rel_linf,ratio\n";
        for (double s : {0.6, 0.75, 0.9}) {
            double prev = 0.0;
            for (double dt : {0.1, 0.05, 0.025, 0.0125}) {
                const double e = duhamel_error(s, dt);
                const double ratio = prev > 0.0 ? prev / e : 0.0;
                out << s << ',' << dt << ',' << e << ',' << ratio << '\n';
                log << "duhamel s = " << s << " dt = " << dt << " rel_linf " << fmt(e) << '\n';
                if (prev > 0.0 && ratio < 3.5) ok = false;
                prev = e;
            }
        }
    } else {
        throw ConfigError("oracle: unknown check '" + check + "' (symbol, heat, duhamel)");
    }
    return ok ? 0 : 1;
}

int command_sweep(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
    config.validate();
    const auto dir = prepare_dir(out_dir);
    AnalysisConfig a = config.analysis;
    a.diagnostics = {"penalization", "penalty_bound"};
    std::erase_if(a.report_only, [](const std::string& d) { return d != "penalization" && d != "penalty_bound"; });
    const Selection sel(a);
    auto csv = open_out(dir / "sweep.csv");
    const auto rows = sweep_rows(config, sel, &csv);
    csv.close();
    return finish(rows, dir, log);
}

int run(const RunConfig& config, const std::string& out_dir, std::ostream& log) {
    config.validate();
    const auto dir = prepare_dir(out_dir);
    {
        auto out = open_out(dir / "config.yaml");
        out << serialize_config(config);
    }
    const PenaltySolver solver(config.problem(), config.solver);
    const SolveReport rep = solve_and_write(solver, dir, log);
    std::vector<Diagnostic> rows = analyze(config, solver, rep.trajectory);
    const Selection sel(config.analysis);
    auto more = run_level_rows(config, sel);
    rows.insert(rows.end(), more.begin(), more.end());
    if (sel.on("monotonicity_formula")) {
        SliceContext sc = make_slice(solver, rep.trajectory, config.analysis.slice);
        sc.probe = probe_point(sc.mask);
        const WField w = build_w(sc.u, solver.operators(), sc.mask, sc.probe, config.extension_params(),
                                 contact_tolerance(solver.problem(), config.solver));
        const double s = config.problem().params.s;
        const auto mono = monotonicity_report(w.extension, phi_radii(w.extension), (1.0 - s) / (2.0 * s));
        auto out = open_out(dir / "monotonicity.csv");
        write_monotonicity_csv(out, mono);
    }
    return finish(rows, dir, log);
}

}  // namespace fracobstacle
