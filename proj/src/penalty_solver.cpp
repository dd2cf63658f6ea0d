#include "fracobstacle/penalty_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "fracobstacle/error.hpp"

namespace fracobstacle {

namespace {

constexpr double blow_up_threshold = 1e6;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_blow_up(const Field& u, double t) {
    if (!u.all_finite() || u.max_abs() > blow_up_threshold) {
        std::ostringstream os;
        os << "solution blew up at t = " << t << " (||u||_inf = " << u.max_abs() << ")";
        throw NumericalError(os.str());
    }
}

double min_difference(const Field& a, const Field& b) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::min(m, a[i] - b[i]);
    return m;
}

}  // namespace

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::imex: return "imex";
        case Scheme::projected: return "projected";
        case Scheme::picard: return "picard";
    }
    return "imex";
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "imex") return Scheme::imex;
    if (name == "projected" || name == "explicit") return Scheme::projected;
    if (name == "picard") return Scheme::picard;
    throw ConfigError("unknown scheme '" + name + "' (expected imex, projected or picard)");
}

void PenaltyConfig::validate() const {
    if (!(eps > 0.0)) throw ConfigError("solver: eps must be positive");
    if (!(T > 0.0)) throw ConfigError("solver: T must be positive");
    if (dt < 0.0 || dt > T) throw ConfigError("solver: dt must satisfy 0 < dt <= T (0 selects eps/4)");
    if (!(picard_tol > 0.0)) throw ConfigError("solver: picard_tol must be positive");
    if (picard_max < 1) throw ConfigError("solver: picard_max must be >= 1");
    if (snapshot_every < 1) throw ConfigError("solver: snapshot_every must be >= 1");
    if (!(beta_ceiling > 1.0)) throw ConfigError("solver: beta_ceiling must exceed 1");
    if (step_count() % snapshot_every != 0) {
        throw ConfigError("solver: snapshot_every must divide the number of steps (" + std::to_string(step_count()) + ")");
    }
}

int PenaltyConfig::step_count() const noexcept {
    const double nominal = dt > 0.0 ? dt : 0.25 * eps;
    return std::max(1, static_cast<int>(std::lround(T / nominal)));
}

double PenaltyConfig::step() const noexcept { return T / step_count(); }

double beta(double x, double eps, double ceiling) {
    const double arg = -x / eps;
    if (arg >= std::log(ceiling)) return ceiling;
    return std::exp(arg);
}

struct ImplicitSolver::Impl {
    const OperatorSet* ops = nullptr;
    double dt = 0.0;
    std::unique_ptr<Eigen::LLT<Eigen::MatrixXd>> llt;
};

ImplicitSolver::ImplicitSolver(const OperatorSet& ops, double dt) : impl_(std::make_unique<Impl>()) {
    impl_->ops = &ops;
    impl_->dt = dt;
    if (ops.grid().dim == 1) {
        const auto n = static_cast<Eigen::Index>(ops.grid().size());
        const auto a = ops.frac_laplacian_matrix();
        Eigen::MatrixXd m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(a.data(), n, n);
        m *= dt;
        m.diagonal().array() += 1.0;
        impl_->llt = std::make_unique<Eigen::LLT<Eigen::MatrixXd>>(m);
        if (impl_->llt->info() != Eigen::Success) throw NumericalError("implicit solve: Cholesky factorization failed");
    }
}

ImplicitSolver::~ImplicitSolver() = default;
ImplicitSolver::ImplicitSolver(ImplicitSolver&&) noexcept = default;
ImplicitSolver& ImplicitSolver::operator=(ImplicitSolver&&) noexcept = default;

double ImplicitSolver::dt() const noexcept { return impl_->dt; }

Field ImplicitSolver::solve(const Field& rhs) const {
    const Impl& m = *impl_;
    const Grid& grid = m.ops->grid();
    if (m.llt) {
        Eigen::Map<const Eigen::VectorXd> b(rhs.values.data(), static_cast<Eigen::Index>(rhs.size()));
        const Eigen::VectorXd x = m.llt->solve(b);
        return Field(grid, std::vector<double>(x.data(), x.data() + x.size()));
    }
    auto apply = [&](const Field& v) {
        Field av = m.ops->frac_laplacian(v, true);
        for (std::size_t i = 0; i < av.size(); ++i) av[i] = v[i] + m.dt * av[i];
        return av;
    };
    const std::size_t n = rhs.size();
    const double bnorm = std::sqrt(dot(rhs.values, rhs.values));
    Field x = rhs;
    if (bnorm == 0.0) return x;
    Field r = rhs - apply(x);
    Field p = r;
    double rr = dot(r.values, r.values);
    const std::size_t max_iter = 10 * n;
    for (std::size_t it = 0; it < max_iter; ++it) {
        if (std::sqrt(rr) <= 1e-10 * bnorm) return x;
        const Field ap = apply(p);
        const double alpha = rr / dot(p.values, ap.values);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_next = dot(r.values, r.values);
        const double beta_cg = rr_next / rr;
        rr = rr_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta_cg * p[i];
    }
    if (std::sqrt(rr) <= 1e-10 * bnorm) return x;
    throw NumericalError("implicit solve: conjugate gradients did not converge within 10 N iterations");
}

struct PenaltySolver::Impl {
    Problem problem;
    PenaltyConfig config;
    std::unique_ptr<OperatorSet> ops;
    Field psi;
    Field psi_eps;
    Field far_part;  // A applied to the zero field: the far-field contribution
    mutable std::once_flag implicit_once;
    mutable std::unique_ptr<ImplicitSolver> implicit;
    double dt = 0.0;

    [[nodiscard]] Field penalty_source(const Field& u) const {
        Field src(u.grid);
        for (std::size_t i = 0; i < u.size(); ++i) src[i] = beta(u[i] - psi_eps[i], config.eps, config.beta_ceiling);
        return src;
    }

    [[nodiscard]] Field imex(const Field& u, const Field& source) const {
        const Field ru = ops->lower_order(u);
        Field rhs(u.grid);
        for (std::size_t i = 0; i < u.size(); ++i) rhs[i] = u[i] + dt * (ru[i] + source[i] - far_part[i]);
        return implicit->solve(rhs);
    }
};

PenaltySolver::PenaltySolver(Problem problem, PenaltyConfig config) : impl_(std::make_unique<Impl>()) {
    config.validate();
    problem.obstacle.validate();
    Impl& m = *impl_;
    m.problem = std::move(problem);
    m.config = config;
    const Problem& p = m.problem;
    const ObstacleSpec spec = p.obstacle;
    m.ops = std::make_unique<OperatorSet>(p.grid, p.params, p.quad, [spec](const Point& x) { return far_field(spec, x); });
    m.psi = sample_obstacle(spec, p.grid);
    m.psi_eps = mollify(spec, p.grid, config.eps).field;
    m.far_part = m.ops->frac_laplacian(Field(p.grid));
    m.dt = config.step();
}

PenaltySolver::~PenaltySolver() = default;
PenaltySolver::PenaltySolver(PenaltySolver&&) noexcept = default;
PenaltySolver& PenaltySolver::operator=(PenaltySolver&&) noexcept = default;

const OperatorSet& PenaltySolver::operators() const noexcept { return *impl_->ops; }
const Problem& PenaltySolver::problem() const noexcept { return impl_->problem; }
const PenaltyConfig& PenaltySolver::config() const noexcept { return impl_->config; }
const Field& PenaltySolver::psi() const noexcept { return impl_->psi; }
const Field& PenaltySolver::psi_eps() const noexcept { return impl_->psi_eps; }

Field PenaltySolver::step_imex(const Field& u) const { return step_imex(u, impl_->penalty_source(u)); }

Field PenaltySolver::step_imex(const Field& u, const Field& source) const {
    const Impl& m = *impl_;
    if (!u.all_finite()) throw NumericalError("imex step: non-finite state");
    std::call_once(m.implicit_once, [&m] { m.implicit = std::make_unique<ImplicitSolver>(*m.ops, m.dt); });
    return m.imex(u, source);
}

double PenaltySolver::cfl_step() const {
    return 1.0 / (impl_->ops->frac_laplacian_diagonal() + impl_->ops->lower_order_diagonal_bound());
}

Field PenaltySolver::step_projected(const Field& u, double dt) const {
    const Impl& m = *impl_;
    const double limit = cfl_step();
    if (dt > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "projected step: dt = " << dt << " exceeds the explicit CFL bound " << limit;
        throw ConfigError(os.str());
    }
    if (!u.all_finite()) throw NumericalError("projected step: non-finite state");
    const Field au = m.ops->frac_laplacian(u);
    const Field ru = m.ops->lower_order(u);
    Field next(u.grid);
    for (std::size_t i = 0; i < u.size(); ++i) next[i] = std::max(m.psi[i], u[i] - dt * (au[i] - ru[i]));
    return next;
}

SolveReport PenaltySolver::solve_penalized() const {
    const Impl& m = *impl_;
    const auto start = std::chrono::steady_clock::now();
    const int steps = m.config.step_count();
    SolveReport rep;
    rep.trajectory.dt = m.dt * m.config.snapshot_every;
    rep.cfl_margin = 0.25 * m.config.eps / m.dt;
    Field u = m.psi_eps;
    rep.trajectory.push(0.0, u);
    rep.min_slack = min_difference(u, m.psi);
    for (int n = 0; n < steps; ++n) {
        const Field src = m.penalty_source(u);
        rep.max_beta = std::max(rep.max_beta, *std::max_element(src.values.begin(), src.values.end()));
        Field next = step_imex(u, src);
        const double t = (n + 1) * m.dt;
        check_blow_up(next, t);
        rep.monotonicity_violation = std::max(rep.monotonicity_violation, -min_difference(next, u));
        rep.min_slack = std::min(rep.min_slack, min_difference(next, m.psi));
        u = std::move(next);
        if ((n + 1) % m.config.snapshot_every == 0) rep.trajectory.push(t, u);
    }
    const Field src = m.penalty_source(u);
    rep.max_beta = std::max(rep.max_beta, *std::max_element(src.values.begin(), src.values.end()));
    const auto tail = m.ops->tail_report(u);
    rep.tail_bound = tail.bound;
    rep.tail_warning = tail.warning;
    rep.steps = static_cast<std::size_t>(steps);
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

SolveReport PenaltySolver::solve_projected() const {
    const Impl& m = *impl_;
    const auto start = std::chrono::steady_clock::now();
    const int steps = m.config.step_count();
    const double limit = cfl_step();
    const int sub = std::max(1, static_cast<int>(std::ceil(m.dt / (0.9 * limit))));
    const double h = m.dt / sub;
    SolveReport rep;
    rep.trajectory.dt = m.dt * m.config.snapshot_every;
    rep.cfl_margin = limit / h;
    Field u = m.psi;
    rep.trajectory.push(0.0, u);
    rep.min_slack = 0.0;
    for (int n = 0; n < steps; ++n) {
        for (int k = 0; k < sub; ++k) {
            Field next = step_projected(u, h);
            rep.monotonicity_violation = std::max(rep.monotonicity_violation, -min_difference(next, u));
            u = std::move(next);
        }
        const double t = (n + 1) * m.dt;
        check_blow_up(u, t);
        rep.min_slack = std::min(rep.min_slack, min_difference(u, m.psi));
        if ((n + 1) % m.config.snapshot_every == 0) rep.trajectory.push(t, u);
    }
    const auto tail = m.ops->tail_report(u);
    rep.tail_bound = tail.bound;
    rep.tail_warning = tail.warning;
    rep.steps = static_cast<std::size_t>(steps) * sub;
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

PicardReport PenaltySolver::picard_solve() const {
    const Impl& m = *impl_;
    const int steps = m.config.step_count();
    const Grid& grid = m.problem.grid;
    // u_0 == 0 on every time level
    std::vector<Field> prev(steps + 1, Field(grid));
    PicardReport rep;
    int non_decreasing = 0;
    for (int k = 1; k <= m.config.picard_max; ++k) {
        std::vector<Field> cur;
        cur.reserve(steps + 1);
        cur.push_back(m.psi_eps);
        for (int n = 0; n < steps; ++n) {
            Field next = step_imex(cur.back(), m.penalty_source(prev[n]));
            check_blow_up(next, (n + 1) * m.dt);
            cur.push_back(std::move(next));
        }
        double res = 0.0;
        for (int n = 0; n <= steps; ++n) {
            for (std::size_t i = 0; i < grid.size(); ++i) res = std::max(res, std::abs(cur[n][i] - prev[n][i]));
        }
        if (!rep.residuals.empty()) {
            non_decreasing = res >= rep.residuals.back() ? non_decreasing + 1 : 0;
            if (non_decreasing >= 3) rep.non_contraction = true;
        }
        rep.residuals.push_back(res);
        prev = std::move(cur);
        if (res <= m.config.picard_tol) {
            rep.converged = true;
            break;
        }
    }
    // plug the last iterate back into the penalized step
    for (int n = 0; n < steps; ++n) {
        const Field step = step_imex(prev[n]);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            rep.plug_back_residual = std::max(rep.plug_back_residual, std::abs(step[i] - prev[n + 1][i]));
        }
    }
    rep.trajectory.dt = m.dt * m.config.snapshot_every;
    for (int n = 0; n <= steps; ++n) {
        if (n % m.config.snapshot_every == 0) rep.trajectory.push(n * m.dt, prev[n]);
    }
    return rep;
}

SolveReport PenaltySolver::solve() const {
    switch (impl_->config.scheme) {
        case Scheme::imex: return solve_penalized();
        case Scheme::projected: return solve_projected();
        case Scheme::picard: {
            const auto start = std::chrono::steady_clock::now();
            PicardReport pic = picard_solve();
            if (pic.non_contraction) throw NumericalError("picard iteration is not contracting");
            SolveReport rep;
            rep.trajectory = std::move(pic.trajectory);
            rep.steps = static_cast<std::size_t>(impl_->config.step_count());
            rep.cfl_margin = 0.25 * impl_->config.eps / impl_->dt;
            rep.monotonicity_violation = monotonicity_violation(rep.trajectory);
            rep.min_slack = std::numeric_limits<double>::infinity();
            for (const auto& f : rep.trajectory.fields) {
                rep.min_slack = std::min(rep.min_slack, min_difference(f, impl_->psi));
                for (std::size_t i = 0; i < f.size(); ++i) {
                    rep.max_beta = std::max(rep.max_beta, beta(f[i] - impl_->psi_eps[i], impl_->config.eps,
                                                               impl_->config.beta_ceiling));
                }
            }
            const auto tail = impl_->ops->tail_report(rep.trajectory.fields.back());
            rep.tail_bound = tail.bound;
            rep.tail_warning = tail.warning;
            rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            return rep;
        }
    }
    return solve_penalized();
}

SolveReport solve_penalized(const Problem& problem, const PenaltyConfig& config) {
    return PenaltySolver(problem, config).solve_penalized();
}

PicardReport picard_solve(const Problem& problem, const PenaltyConfig& config) {
    return PenaltySolver(problem, config).picard_solve();
}

ComparisonReport comparison_run(const Problem& first, const Problem& second, const PenaltyConfig& config) {
    ComparisonReport rep;
    rep.first = PenaltySolver(first, config).solve();
    rep.second = PenaltySolver(second, config).solve();
    const auto& a = rep.first.trajectory.fields;
    const auto& b = rep.second.trajectory.fields;
    if (a.size() != b.size() || !(a.front().grid == b.front().grid)) {
        throw ConfigError("comparison_run: problems must share grid and time stepping");
    }
    for (std::size_t n = 0; n < a.size(); ++n) {
        for (std::size_t i = 0; i < a[n].size(); ++i) rep.max_violation = std::max(rep.max_violation, a[n][i] - b[n][i]);
    }
    return rep;
}

double monotonicity_violation(const Trajectory& traj) {
    double worst = 0.0;
    for (std::size_t n = 0; n + 1 < traj.size(); ++n) worst = std::max(worst, -min_difference(traj.fields[n + 1], traj.fields[n]));
    return worst;
}

}  // namespace fracobstacle
