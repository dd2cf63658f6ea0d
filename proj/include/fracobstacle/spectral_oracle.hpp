#pragma once

#include <vector>

#include "fracobstacle/grid.hpp"

namespace fracobstacle {

/// Samples on the torus [-L, L)^d with `n` points per axis (a power of two).
/// Wavenumbers are xi_k = pi k / L.
struct PeriodicField {
    int dim = 1;
    double half_width = 1.0;
    int n = 0;
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] double coord(int i) const noexcept { return -half_width + 2.0 * half_width * i / n; }
    void validate() const;
};

/// Drops the last node per axis of a box field, which is the periodic
/// image of the first.
PeriodicField to_periodic(const Field& field);
/// Box field on `n + 1` points per axis with the last node wrapped around.
Field from_periodic(const PeriodicField& field);

/// Inverse transform of |xi|^{2s} F u.
PeriodicField dft_frac_laplacian(const PeriodicField& field, double s);
/// Inverse transform of exp(-|xi|^{2s} t) F u.
PeriodicField heat_evolve(const PeriodicField& field, double t, double s);

/// u_t + (-Delta)^s u = f by the exact integrating factor per mode and the
/// trapezoidal rule on the source. `source[k]` is f at t = k dt and must
/// cover [0, T]. Snapshots are returned at every step, on the box grid.
Trajectory duhamel_solve(const PeriodicField& init, const std::vector<PeriodicField>& source, double dt, double T,
                         double s);

}  // namespace fracobstacle
