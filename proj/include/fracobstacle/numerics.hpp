#pragma once

#include <functional>
#include <span>
#include <vector>

namespace fracobstacle::numerics {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre nodes and weights (Newton on P_n). Cached.
const GaussRule& gauss_legendre(int n);

/// Integral of f over [a, b] with an n-point Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double a, double b, int n = 32);

/// Integral over [a, b] split into `panels` equal pieces.
double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        int panels, int n = 32);

/// Least-squares line through (x_i, y_i).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace fracobstacle::numerics
