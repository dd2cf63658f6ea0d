#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracobstacle/grid.hpp"
#include "fracobstacle/nonlocal_ops.hpp"
#include "fracobstacle/quadrature.hpp"
#include "fracobstacle/regularity.hpp"

namespace fracobstacle {

/// c^P_{d,s} = Gamma(d/2+s) / (pi^{d/2} Gamma(s)), the unit-mass constant.
double poisson_constant(int dim, double s);
/// P(x, y) = c^P y^{2s} / (|x|^2 + y^2)^{(d+2s)/2}.
double poisson_kernel(int dim, double s, const Point& x, double y);
/// d_s with (-Delta)^s u = -d_s lim y^a v_y for the Poisson extension v.
double flux_scale(int dim, double s);

/// y_j = Y (j/M)^p, j = 0..M.
std::vector<double> graded_mesh(double Y, int M, double power);

struct ExtensionParams {
    double s = 0.75;
    double Y = 0.0;  // 0 selects L/2
    int M = 64;
    double grading = 3.0;
    QuadratureConfig quad;
};

/// v(x_i, y_j) on the box grid times a graded y-mesh, stored level-major.
/// Coordinates used by the diagnostics are relative to `origin`.
struct ExtensionField {
    Grid grid;
    std::vector<double> y;
    double s = 0.75;
    Point origin{0.0, 0.0};
    std::vector<double> values;

    [[nodiscard]] double a() const noexcept { return 1.0 - 2.0 * s; }
    [[nodiscard]] std::size_t levels() const noexcept { return y.size(); }
    [[nodiscard]] double at(std::size_t node, std::size_t level) const { return values[level * grid.size() + node]; }
    double& at(std::size_t node, std::size_t level) { return values[level * grid.size() + node]; }
    [[nodiscard]] Field level(std::size_t j) const;
};

/// v = P(., y) * u, the field outside the box read from `far`.
/// Throws NumericalError when the discrete kernel mass drifts from 1 by more
/// than 1e-6 at some level.
ExtensionField extend(const Field& boundary, const ExtensionParams& params, const FarField& far);

struct FluxReport {
    Field flux;
    std::vector<std::size_t> flagged;  // fit residual above 10% of the leading term
};

/// Fit v(x, y_j) - v(x, 0) ~ A y^{1-a} + B y^2 on levels 1..6 and return
/// -A (1-a) d_s, which equals (-Delta)^s of the boundary data.
FluxReport normal_flux_report(const ExtensionField& ext);
Field normal_flux(const ExtensionField& ext);

struct WBoundary {
    Field values;  // [(-Delta)^s u - R u(0)] on the mask, 0 elsewhere
    ContactMask mask;
    double r_origin = 0.0;  // R u at the origin node
    std::size_t origin = 0;
    std::size_t clipped = 0;    // mask nodes below -tol, raised to -tol
    double most_negative = 0.0;
};

struct WField {
    WBoundary boundary;
    ExtensionField extension;  // exponent 1 - s, zero outside the box
};

/// `origin` must be a free-boundary node of `mask`.
WField build_w(const Field& u, const OperatorSet& ops, const ContactMask& mask, std::size_t origin,
               const ExtensionParams& params, double tol);

/// r^{-2(1-s)} int_{B_r^+ minus B_2h} |grad w|^2 y^{-a} / |z|^{n-1-a} dz, for
/// `ext` the extension of w (weight exponent -a).
double phi(const ExtensionField& ext_w, double r);

struct MonotonicityReport {
    std::vector<double> radii;
    std::vector<double> values;
    double alpha = 0.0;
    double delta = 0.0;
    double eta = 0.0;
    double phi_one = 0.0;     // phi at the largest radius
    double worst_ratio = 0.0; // max phi(r) / (1 + phi_one)
    double multiplier = 10.0;
    [[nodiscard]] bool pass() const { return worst_ratio <= multiplier; }
};

MonotonicityReport monotonicity_report(const ExtensionField& ext_w, const std::vector<double>& radii, double alpha,
                                       double multiplier = 10.0);

/// True when the convex hull of {w(., 0) >= r^{alpha+delta}} within B_r
/// excludes the origin.
bool convex_hull_check(const WBoundary& w, const Point& origin, double r, double alpha, double delta);

/// Value, d/dalpha and d/dbeta of a function on the unit half-sphere in the
/// chart x_1 = cos alpha, x_2 = sin alpha cos beta, y = sin alpha sin beta.
using SphereFunction = std::function<std::array<double, 3>(double alpha, double beta)>;

/// int |grad_theta h|^2 y^{-a} / int h^2 y^{-a} over the half-sphere S^2_+.
double halfsphere_rayleigh(int n, double s, int resolution);
double halfsphere_rayleigh(double s, int resolution, const SphereFunction& h);
/// (sqrt(x_2^2 + y^2) - x_2)^{1-s} in the chart above.
SphereFunction halfsphere_eigenfunction(double s);

struct VTildeReport {
    double worst_ratio = 0.0;
    std::size_t node = 0;
    std::size_t level = 0;
};

/// ratio of v~(x,y) - v~(x,0) to n C0 y^2/(1+a) + C1 |x|^gamma y^{1-a}/((1-a) d_s)
/// over mask nodes, with v~ = v - psi + R u(0) y^{1-a}/((1-a) d_s).
VTildeReport vtilde_bounds_check(const ExtensionField& ext, const Field& psi, const ContactMask& mask,
                                 double r_origin, double C0, double C1, double gamma);

/// inf of y^a v~_y over Gamma_r = B_r x [0, eta r] for r = 4^-k, k = 0..k_max,
/// skipping unresolved radii (NaN).
std::vector<double> flux_decay_profile(const ExtensionField& ext, const Field& psi, double r_origin, int k_max);

/// CSV `x,y,value` (`x0,x1,y,value` in 2D).
void write_extension_csv(std::ostream& out, const ExtensionField& ext);
void write_monotonicity_csv(std::ostream& out, const MonotonicityReport& rep);

}  // namespace fracobstacle
