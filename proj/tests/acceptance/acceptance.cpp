// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fracobstacle/config.hpp"
#include "fracobstacle/error.hpp"
#include "fracobstacle/runner.hpp"

namespace fo = fracobstacle;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s  %2d %-28s %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", id, name.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

fo::RunConfig load(const char* name) { return fo::load_config(std::string(FRACOBSTACLE_CONFIG_DIR) + "/" + name); }

double seconds(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

// Shared runs, computed once on first use.

struct Put1d {
    fo::RunConfig config = load("put1d.cfg");
    fo::Problem problem = config.problem();
};

const Put1d& put1d() {
    static const Put1d p;
    return p;
}

const fo::PenaltySweep& put1d_sweep() {
    static const fo::PenaltySweep sweep = [] {
        fo::PenaltyConfig base = put1d().config.solver;
        base.dt = 0.0;  // eps / 4 at every eps
        return fo::penalty_sweep(put1d().problem, base, {0.1, 0.05, 0.025});
    }();
    return sweep;
}

struct Cafi {
    fo::RunConfig config = load("cafi.cfg");
    fo::PenaltySolver solver{config.problem(), config.solver};
    fo::SolveReport report = solver.solve();
};

const Cafi& cafi() {
    static const Cafi c;
    return c;
}

double row_value(const std::vector<fo::Diagnostic>& rows, const std::string& quantity) {
    for (const auto& r : rows) {
        if (r.quantity == quantity) return r.value;
    }
    throw fo::NumericalError("missing diagnostic " + quantity);
}

std::vector<fo::Diagnostic> cafi_rows(const std::string& diagnostic) {
    fo::RunConfig c = cafi().config;
    c.analysis.diagnostics = {diagnostic};
    c.analysis.report_only.clear();
    return fo::analyze(c, cafi().solver, cafi().report.trajectory);
}

}  // namespace

int main() {
    std::printf("acceptance: 15 criteria\n");

    criterion(1, "operator symbol", [] {
        double worst = 0.0;
        double runtime = 0.0;
        for (double s : {0.6, 0.75, 0.9}) {
            const auto st = fo::symbol_study(s, 513, 16.0, fo::QuadratureConfig{});
            worst = std::max(worst, st.rel_linf);
            runtime = std::max(runtime, st.runtime_s);
        }
        return Outcome{worst <= 2e-2 && runtime < 5.0,
                       "max rel Linf " + num(worst) + " <= 0.02, slowest s " + num(runtime) + " s < 5 s"};
    });

    criterion(2, "extremal sandwich", [] {
        const fo::RunConfig c = load("bump2d.cfg");
        const auto st = fo::sandwich_study(c.problem(), 50, c.seed);
        return Outcome{st.worst <= 1e-8 && st.runtime_s < 30.0,
                       "worst " + num(st.worst) + " <= 1e-8 over " + std::to_string(st.pairs) + " pairs, " +
                           num(st.runtime_s) + " s < 30 s"};
    });

    criterion(3, "penalization convergence", [] {
        const auto start = Clock::now();
        const auto& sw = put1d_sweep();
        const double runtime = seconds(start);
        bool decreasing = true;
        std::string dist;
        for (std::size_t k = 0; k < sw.entries.size(); ++k) {
            dist += (k ? ", " : "") + num(sw.entries[k].distance);
            if (k) decreasing = decreasing && sw.entries[k].distance < sw.entries[k - 1].distance;
        }
        const double final_rel = sw.entries.back().distance / sw.psi_norm;
        return Outcome{decreasing && final_rel <= 0.05 && runtime < 120.0,
                       "distances " + dist + (decreasing ? " decreasing" : " NOT decreasing") + ", final/|psi| " +
                           num(final_rel) + " <= 0.05, " + num(runtime) + " s < 120 s"};
    });

    criterion(4, "uniform penalty bound", [] {
        const auto& sw = put1d_sweep();
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        std::string betas;
        for (std::size_t k = 0; k < sw.entries.size(); ++k) {
            lo = std::min(lo, sw.entries[k].max_beta);
            hi = std::max(hi, sw.entries[k].max_beta);
            betas += (k ? ", " : "") + num(sw.entries[k].max_beta);
        }
        const double var = (hi - lo) / lo;
        return Outcome{var <= 0.2, "sup beta " + betas + ", variation " + num(var) + " <= 0.2"};
    });

    criterion(5, "comparison principle", [] {
        fo::Problem shifted = put1d().problem;
        shifted.obstacle.offset += 0.1;
        const auto rep = fo::comparison_run(put1d().problem, shifted, put1d().config.solver);
        return Outcome{rep.max_violation <= 5e-3, "max (u1 - u2)^+ " + num(rep.max_violation) + " <= 0.005"};
    });

    criterion(6, "time monotonicity, nesting", [] {
        const fo::PenaltySolver solver(put1d().problem, put1d().config.solver);
        const fo::Trajectory traj = solver.solve_penalized().trajectory;
        const double eps = solver.config().eps;
        const double tol = 5.0 * traj.dt * eps;
        const auto mono = fo::monotone_in_time_check(traj, tol);
        const auto nest = fo::contact_nesting_check(traj, solver.psi(), fo::penalized_contact_tol(eps));

        // obstacle solution on the same problem, reported alongside
        fo::PenaltyConfig pc = put1d().config.solver;
        pc.scheme = fo::Scheme::projected;
        const fo::PenaltySolver ref(put1d().problem, pc);
        const fo::Trajectory pt = ref.solve_projected().trajectory;
        const auto pmono = fo::monotone_in_time_check(pt, tol);
        const auto pnest = fo::contact_nesting_check(pt, ref.psi(), fo::contact_tolerance(ref.problem(), pc));
        return Outcome{mono.pass && nest.worst_fraction <= 0.01,
                       "penalized: worst u(t+dt)-u(t) " + num(mono.worst) + " >= " + num(-tol) +
                           ", nesting violations " + num(nest.worst_fraction) + " <= 0.01; obstacle solution: " +
                           num(pmono.worst) + ", " + num(pnest.worst_fraction)};
    });

    criterion(7, "Lipschitz stability", [] {
        std::vector<fo::LipschitzBounds> b;
        for (int n : {513, 1025}) {
            fo::RunConfig c = load("cafi.cfg");
            c.grid = fo::build_grid(1, c.grid.half_width, n);
            const fo::PenaltySolver solver(c.problem(), c.solver);
            b.push_back(fo::lipschitz_bounds(solver.solve().trajectory));
        }
        const double dt_change = std::abs(b[1].sup_dt - b[0].sup_dt) / b[0].sup_dt;
        const double grad_change = std::abs(b[1].sup_grad - b[0].sup_grad) / b[0].sup_grad;
        return Outcome{dt_change <= 0.1 && grad_change <= 0.1,
                       "sup|u_t| " + num(b[0].sup_dt) + " -> " + num(b[1].sup_dt) + " (" + num(dt_change) +
                           "), sup|grad u| " + num(b[0].sup_grad) + " -> " + num(b[1].sup_grad) + " (" +
                           num(grad_change) + "), both <= 0.1"};
    });

    criterion(8, "sign structure", [] {
        // obstacle solution on the put problem, mid-horizon slice
        fo::PenaltyConfig pc = put1d().config.solver;
        pc.scheme = fo::Scheme::projected;
        pc.dt = pc.T / 64.0;
        const fo::PenaltySolver ref(put1d().problem, pc);
        const fo::Trajectory traj = ref.solve_projected().trajectory;
        const std::size_t k = fo::slice_index(traj, 0.5);
        const fo::ContactMask mask = fo::contact_set(traj.fields[k], ref.psi(), fo::contact_tolerance(ref.problem(), pc));
        const double tol = 5e-2 * fo::sign_structure_scale(ref.psi(), ref.operators());
        const auto ss = fo::sign_structure_check(traj.fields[k], mask, ref.operators(), tol);
        const bool pass = ss.contact_violation <= 0.02 && ss.free_violation <= 0.02;

        // the penalized solution at eps = 0.1 on the same slice, reported alongside
        const fo::PenaltySolver pen(put1d().problem, put1d().config.solver);
        const fo::Trajectory pt = pen.solve_penalized().trajectory;
        const std::size_t kp = fo::slice_index(pt, 0.5);
        const fo::ContactMask pm =
            fo::contact_set(pt.fields[kp], pen.psi(), fo::penalized_contact_tol(pen.config().eps));
        std::string penalized = "n/a (mask covers the grid)";
        if (!pm.full() && !pm.empty()) {
            const auto ps = fo::sign_structure_check(pt.fields[kp], pm, pen.operators(), tol);
            penalized = num(ps.contact_violation) + "/" + num(ps.free_violation);
        }
        return Outcome{pass, "obstacle solution: contact " + num(ss.contact_violation) + ", free " +
                                 num(ss.free_violation) + " (both <= 0.02; " + std::to_string(ss.contact_nodes) + "/" +
                                 std::to_string(ss.free_nodes) + " nodes); penalized eps=0.1 contact/free " +
                                 penalized};
    });

    criterion(9, "extension flux identity", [] {
        const auto fs = fo::flux_study(0.75, 257, 8.0, 64, fo::QuadratureConfig{});
        return Outcome{fs.rel_l2 <= 5e-2 && fs.runtime_s < 60.0,
                       "rel L2 " + num(fs.rel_l2) + " <= 0.05, " + num(fs.runtime_s) + " s < 60 s"};
    });

    criterion(10, "half-sphere eigenvalue", [] {
        const auto start = Clock::now();
        double worst = 0.0;
        for (double s : {0.6, 0.75, 0.9}) {
            const double target = (1.0 - s) * (1.0 + s);
            worst = std::max(worst, std::abs(fo::halfsphere_rayleigh(2, s, 256) - target) / target);
        }
        const double runtime = seconds(start);
        return Outcome{worst <= 1e-2 && runtime < 10.0,
                       "max rel error " + num(worst) + " <= 0.01, " + num(runtime) + " s < 10 s"};
    });

    criterion(11, "free-boundary decay", [] {
        const auto start = Clock::now();
        const auto rows = cafi_rows("decay");
        const double runtime = seconds(start);
        const double kappa = row_value(rows, "kappa_space");
        const double s = cafi().config.op.s;
        return Outcome{std::abs(kappa - (1.0 + s)) <= 0.2 && runtime < 600.0,
                       "kappa_space " + num(kappa) + " in [" + num(0.8 + s) + ", " + num(1.2 + s) + "], band " +
                           num(row_value(rows, "kappa_space_band")) + ", " + num(runtime) + " s < 600 s"};
    });

    criterion(12, "monotonicity formula", [] {
        const auto rows = cafi_rows("monotonicity_formula");
        const double ratio = row_value(rows, "phi_worst_ratio");
        return Outcome{ratio <= 10.0, "max phi(r)/(1+phi(1)) " + num(ratio) + " <= 10, clipped w nodes " +
                                          num(row_value(rows, "w_clipped_nodes"))};
    });

    criterion(13, "time exponent", [] {
        const std::size_t snaps = cafi().report.trajectory.size();
        const auto rows = cafi_rows("time_exponent");
        const double kappa = row_value(rows, "kappa_time");
        const double s = cafi().config.op.s;
        const double target = (1.0 - s) / (2.0 * s) - 0.15;
        return Outcome{kappa >= target && snaps >= 64, "kappa_time " + num(kappa) + " >= " + num(target) + " with " +
                                                           std::to_string(snaps) + " snapshots"};
    });

    criterion(14, "exponent ladder", [] {
        double worst_ratio = 0.0;
        double worst_gap = 0.0;
        for (double s : {0.6, 0.75, 0.9}) {
            const fo::Ladder l = fo::exponent_ladder(s, 0.5 * (1.0 - s) / (2.0 * s), 80);
            const double ratio = (1.0 - s) / (1.0 + s);
            for (std::size_t j = 0; j + 1 < l.alphas.size(); ++j) {
                const double e0 = l.fixed_point - l.alphas[j];
                const double e1 = l.fixed_point - l.alphas[j + 1];
                if (std::abs(e0) < 1e-3) break;
                worst_ratio = std::max(worst_ratio, std::abs(e1 / e0 - ratio));
            }
            worst_gap = std::max(worst_gap, std::abs(l.alphas.back() - l.fixed_point));
        }
        return Outcome{worst_ratio <= 1e-12 && worst_gap <= 1e-14,
                       "ratio error " + num(worst_ratio) + " <= 1e-12, limit gap " + num(worst_gap) + " <= 1e-14"};
    });

    criterion(15, "Picard contraction", [] {
        fo::PenaltyConfig pc = put1d().config.solver;
        pc.scheme = fo::Scheme::picard;
        const auto rep = fo::PenaltySolver(put1d().problem, pc).picard_solve();
        double worst = 0.0;
        for (std::size_t k = 3; k < rep.residuals.size(); ++k) {
            if (rep.residuals[k - 1] > 0.0) worst = std::max(worst, rep.residuals[k] / rep.residuals[k - 1]);
        }
        const bool pass = worst < 1.0 && rep.plug_back_residual <= 10.0 * pc.picard_tol && rep.converged;
        return Outcome{pass, "max ratio k>=3 " + num(worst) + " < 1, plug-back " + num(rep.plug_back_residual) +
                                 " <= " + num(10.0 * pc.picard_tol) + ", " + std::to_string(rep.residuals.size()) +
                                 " iterations"};
    });

    std::printf("acceptance: %d of 15 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
