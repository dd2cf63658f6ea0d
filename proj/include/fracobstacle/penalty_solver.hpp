#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fracobstacle/grid.hpp"
#include "fracobstacle/nonlocal_ops.hpp"

namespace fracobstacle {

enum class Scheme { imex, projected, picard };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct PenaltyConfig {
    double eps = 0.1;
    double dt = 0.0;  // 0 selects eps/4; rounded so that T is a whole number of steps
    double T = 0.25;
    Scheme scheme = Scheme::imex;
    double picard_tol = 1e-8;
    int picard_max = 60;
    int snapshot_every = 1;
    double beta_ceiling = 1e12;

    void validate() const;
    /// Step actually used: T divided into round(T / dt) equal steps. The
    /// projected scheme subdivides each step to satisfy its CFL bound.
    [[nodiscard]] double step() const noexcept;
    [[nodiscard]] int step_count() const noexcept;
};

/// Penalty beta_eps(x) = exp(-x/eps), clamped at `ceiling`.
double beta(double x, double eps, double ceiling = 1e12);

struct Problem {
    Grid grid;
    ObstacleSpec obstacle;
    OperatorParams params;
    QuadratureConfig quad;
};

struct SolveReport {
    Trajectory trajectory;
    double max_beta = 0.0;      // sup of beta_eps(u - psi_eps) over the run (penalized)
    double min_slack = 0.0;     // min of u - psi over the run
    double monotonicity_violation = 0.0;  // max of (u(t) - u(t+dt))^+ over nodes and steps
    double runtime_s = 0.0;
    double cfl_margin = 0.0;    // explicit CFL step over the step used (projected); eps/(4 dt) (penalized)
    double tail_bound = 0.0;
    bool tail_warning = false;
    std::size_t steps = 0;
};

struct PicardReport {
    Trajectory trajectory;
    std::vector<double> residuals;  // ||u_k - u_{k-1}||_inf over space-time
    bool converged = false;
    bool non_contraction = false;   // three consecutive non-decreasing residuals
    double plug_back_residual = 0.0;  // penalized-step residual of the final iterate
};

struct ComparisonReport {
    double max_violation = 0.0;  // max over space-time of (u1 - u2)^+
    SolveReport first;
    SolveReport second;
};

/// Solve of (I + dt A) x = rhs with A the homogeneous discrete (-Delta)^s:
/// dense Cholesky in d = 1, matrix-free conjugate gradients otherwise.
class ImplicitSolver {
public:
    ImplicitSolver(const OperatorSet& ops, double dt);
    ~ImplicitSolver();
    ImplicitSolver(ImplicitSolver&&) noexcept;
    ImplicitSolver& operator=(ImplicitSolver&&) noexcept;

    [[nodiscard]] Field solve(const Field& rhs) const;
    [[nodiscard]] double dt() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Time integration of the penalized problem and of the projected oracle on
/// one problem definition. The far field is the closed-form obstacle.
class PenaltySolver {
public:
    PenaltySolver(Problem problem, PenaltyConfig config);
    ~PenaltySolver();
    PenaltySolver(PenaltySolver&&) noexcept;
    PenaltySolver& operator=(PenaltySolver&&) noexcept;

    [[nodiscard]] const OperatorSet& operators() const noexcept;
    [[nodiscard]] const Problem& problem() const noexcept;
    [[nodiscard]] const PenaltyConfig& config() const noexcept;
    [[nodiscard]] const Field& psi() const noexcept;
    [[nodiscard]] const Field& psi_eps() const noexcept;

    /// (I + dt A) u_next = u + dt (R u + beta_eps(u - psi_eps) - A_far).
    [[nodiscard]] Field step_imex(const Field& u) const;
    /// Same step with the penalty source supplied.
    [[nodiscard]] Field step_imex(const Field& u, const Field& source) const;
    /// u_next = max(psi, u - dt (A u - R u)); throws when dt exceeds the CFL bound.
    [[nodiscard]] Field step_projected(const Field& u, double dt) const;
    /// Largest stable explicit step: 1 / (A_ii + |R_ii|).
    [[nodiscard]] double cfl_step() const;

    [[nodiscard]] SolveReport solve_penalized() const;
    [[nodiscard]] SolveReport solve_projected() const;
    [[nodiscard]] PicardReport picard_solve() const;
    /// Dispatches on config().scheme; picard runs return the final iterate.
    [[nodiscard]] SolveReport solve() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

SolveReport solve_penalized(const Problem& problem, const PenaltyConfig& config);
PicardReport picard_solve(const Problem& problem, const PenaltyConfig& config);
ComparisonReport comparison_run(const Problem& first, const Problem& second, const PenaltyConfig& config);

/// max over nodes and steps of (u(t) - u(t+dt))^+.
double monotonicity_violation(const Trajectory& traj);

}  // namespace fracobstacle
