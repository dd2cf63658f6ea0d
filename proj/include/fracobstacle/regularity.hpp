#pragma once

#include <string>
#include <vector>

#include "fracobstacle/grid.hpp"
#include "fracobstacle/nonlocal_ops.hpp"

namespace fracobstacle {

/// Nodes where u - psi <= tol.
struct ContactMask {
    Grid grid;
    std::vector<char> inside;
    double tol = 0.0;

    [[nodiscard]] std::size_t count() const;
    [[nodiscard]] bool empty() const { return count() == 0; }
    [[nodiscard]] bool full() const { return count() == inside.size(); }
};

ContactMask contact_set(const Field& u, const Field& psi, double tol);
/// h^{1+s}: the indicator tolerance for projected solutions.
double projected_contact_tol(const Grid& grid, double s);
/// 10 eps: the indicator tolerance for penalized solutions.
double penalized_contact_tol(double eps);

struct FreeBoundary {
    std::vector<std::size_t> nodes;
    bool degenerate = false;  // every masked node is a boundary node
};

/// Masked nodes with at least one unmasked axis neighbour.
FreeBoundary free_boundary(const ContactMask& mask);
/// Free-boundary node farthest from the edge of the box.
std::size_t probe_point(const ContactMask& mask);

/// Power-law fit y ~ C x^kappa in log-log coordinates.
struct ExponentFit {
    double kappa = 0.0;
    double band = 0.0;  // largest deviation of a consecutive-pair slope from kappa
    std::vector<double> abscissae;
    std::vector<double> values;
    [[nodiscard]] std::string range() const;
};

ExponentFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

/// r_max, r_max/2, ... down to r_min.
std::vector<double> dyadic_radii(double r_min, double r_max);

/// Slope of log sup_{B_r(x0)} |u - psi| against log r. Radii must lie in
/// [8h, L/4]; at least four must carry a non-zero supremum.
ExponentFit decay_exponent(const Field& u, const Field& psi, std::size_t x0, const std::vector<double>& radii);

/// max over node pairs with 0 < |x - z| <= window of |f(x) - f(z)| / |x - z|^beta.
double holder_seminorm(const Field& f, double beta, double window);

enum class TimeSelector { u, dt_u, fraclap_u };

TimeSelector time_selector_from_string(const std::string& name);

/// Slope of log sup_t |f(t+tau, x) - f(t, x)| against log tau over dyadic tau.
/// `ops` is required for the fraclap_u selector.
ExponentFit time_exponent(const Trajectory& traj, std::size_t node, TimeSelector selector,
                          const OperatorSet* ops = nullptr);

/// -min over interior nodes and axes of delta u(x, h e_i) / h^2, floored at 0.
double semiconvexity_constant(const Field& u);

struct MonotonicityCheck {
    double worst = 0.0;  // min over nodes and steps of u(t+dt) - u(t)
    bool pass = true;
};

MonotonicityCheck monotone_in_time_check(const Trajectory& traj, double tol);

struct NestingCheck {
    double worst_fraction = 0.0;  // max over steps of the share of nodes entering the mask
    std::size_t worst_step = 0;
};

/// Contact masks should shrink in time; counts nodes that join the mask.
NestingCheck contact_nesting_check(const Trajectory& traj, const Field& psi, double tol);

struct SignStructure {
    Field g;                         // (-Delta)^s u - R u
    double contact_violation = 0.0;  // share of mask nodes with g < -tol
    double free_violation = 0.0;     // share of off-mask nodes with g > tol
    std::size_t contact_nodes = 0;
    std::size_t free_nodes = 0;
};

SignStructure sign_structure_check(const Field& u, const ContactMask& mask, const OperatorSet& ops, double tol);
/// ||(-Delta)^s psi - R psi||_inf, the scale of the sign-structure tolerance.
double sign_structure_scale(const Field& psi, const OperatorSet& ops);

struct Ladder {
    std::vector<double> alphas;
    double fixed_point = 0.0;  // (1-s)/(2s)
    double ratio = 0.0;        // (1-s)/(1+s)
};

/// alpha_{j+1} = (1 + alpha_j)(1 - s)/(1 + s).
Ladder exponent_ladder(double s, double alpha0, int k_max);

struct AuxConstants {
    double gamma = 0.0;  // s - max(sigma, 1/2)
    double delta = 0.0;  // (alpha/(alpha+2s) - alpha/2)/4
    double eta = 0.0;    // sqrt((1+a)/(2n))
    double a = 0.0;      // 1 - 2s
};

AuxConstants aux_constants(double s, double sigma, double alpha, int n);

struct LipschitzBounds {
    double sup_dt = 0.0;    // sup |u(t+dt) - u(t)| / dt
    double sup_grad = 0.0;  // sup |u(x + h e_i) - u(x)| / h
};

LipschitzBounds lipschitz_bounds(const Trajectory& traj);

/// Centered time differences; one-sided at the ends.
Trajectory time_derivative(const Trajectory& traj);

}  // namespace fracobstacle
