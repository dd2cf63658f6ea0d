#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fracobstacle/grid.hpp"

namespace fracobstacle {

/// Far-field rule: value of the solution at points outside the box.
/// An empty function means the field vanishes outside the box.
using FarField = std::function<double(const Point&)>;

/// Quadrature controls shared by every nonlocal operator.
///
/// The integration domain is split into a Taylor block of side
/// `taylor_cells * h` around the singularity, the lattice cells out to the
/// box diameter, and a log-radial tail (octave panels of `radial_nodes`
/// Gauss points) up to `tail_radius_factor * L`, closed by one remainder
/// node per direction that carries the kernel mass beyond.
struct QuadratureConfig {
    int taylor_cells = 1;
    double tail_radius_factor = 64.0;
    int radial_nodes = 12;
    int angular_nodes = 32;  // directions per half circle (d = 2), multiple of 4
    int angular_sub = 4;     // Gauss nodes per angular cell in the tail
    double tolerance = 1e-3;

    void validate() const;
};

/// Radial kernel kappa(rho) together with the moments the quadrature needs.
class RadialKernel {
public:
    explicit RadialKernel(int dim) : dim_(dim) {}
    virtual ~RadialKernel() = default;

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] virtual double value(double rho) const = 0;
    /// int_0^R kappa(rho) rho^(d-1+p) d rho
    [[nodiscard]] virtual double inner_moment(double radius, int p) const = 0;
    /// int_R^inf kappa(rho) rho^(d-1) d rho
    [[nodiscard]] virtual double outer_mass(double radius) const = 0;

private:
    int dim_;
};

/// kappa(rho) = rho^(-d-2*order), the fractional kernel without its constant.
class PowerKernel final : public RadialKernel {
public:
    PowerKernel(int dim, double order) : RadialKernel(dim), order_(order) {}
    [[nodiscard]] double value(double rho) const override;
    [[nodiscard]] double inner_moment(double radius, int p) const override;
    [[nodiscard]] double outer_mass(double radius) const override;
    [[nodiscard]] double order() const noexcept { return order_; }

private:
    double order_;
};

/// Node layout of the lattice quadrature for one grid. Independent of the
/// kernel, so one layout serves every operator on the grid.
///
/// Symmetric layouts integrate even integrands (second differences) over a
/// half space and double the weights; non-symmetric layouts cover every
/// direction.
struct QuadratureGeometry {
    Grid grid;
    QuadratureConfig config;
    bool symmetric = true;
    int reach = 0;         // lattice offsets satisfy |k|_inf <= reach
    int block_half = 0;    // Taylor block covers |k|_inf <= block_half
    int ext_width = 0;     // extended lattice width per axis: n + 2*reach
    double tail_radius = 0.0;

    struct Offset {
        std::array<int, 2> k;
        Point y;
        long stride;  // flat displacement in the extended lattice
    };
    std::vector<Offset> offsets;

    /// Taylor-block directions: Gauss nodes in angle (d = 2) or +-e_1.
    struct Direction {
        Point dir;
        double theta;
        double measure;  // angular weight * multiplicity
    };
    std::vector<Direction> directions;

    struct TailNode {
        Point y;
        double rho;
        double measure;  // Gauss weight * angular width * multiplicity
        bool remainder;  // carries the mass beyond the tail radius
    };
    std::vector<TailNode> tail;

    [[nodiscard]] std::size_t ext_size() const noexcept;
    [[nodiscard]] long ext_index(std::size_t node) const noexcept;
    /// Distance from the origin to the Taylor block edge along angle theta.
    [[nodiscard]] double block_radius(double theta) const noexcept;
};

QuadratureGeometry build_geometry(const Grid& grid, const QuadratureConfig& config, bool symmetric);

/// Kernel-dependent weights on a geometry. Every weight multiplies the
/// finite difference (second difference for p = 2, first for p = 1)
/// evaluated at its node, except block weights which multiply the local
/// quadratic (p = 2) or linear (p = 1) model along their direction.
struct QuadratureWeights {
    int moment_power = 2;
    std::vector<double> lattice;
    std::vector<double> block;
    std::vector<double> tail;
    double remainder_mass = 0.0;  // total weight on remainder nodes
};

/// Optional angular profile k(y) multiplying the radial kernel at each node.
using KernelProfile = std::function<double(const Point&)>;

QuadratureWeights compute_weights(const QuadratureGeometry& geom, const RadialKernel& kernel, int moment_power,
                                  const KernelProfile& profile = {});

/// Far-field samples the quadrature touches outside the box.
///
/// Tail samples are cached when they fit in memory and evaluated on demand
/// otherwise.
struct BoundaryValues {
    bool zero = true;
    FarField far;
    std::vector<double> halo;  // extended lattice; interior entries are unused
    std::vector<double> tail;  // node-major cache; pair sums for symmetric layouts

    /// far(x + y_j) (+ far(x - y_j) for symmetric layouts) at node `node`.
    [[nodiscard]] double tail_value(const QuadratureGeometry& geom, std::size_t node, std::size_t j) const;
};

BoundaryValues sample_boundary(const QuadratureGeometry& geom, const FarField& far);

/// Per-node sum over tail nodes of w_j * tail_value(node, j).
std::vector<double> tail_far_sum(const QuadratureGeometry& geom, const BoundaryValues& bv,
                                 const std::vector<double>& w);

/// Extended-lattice copy of `u` with the halo filled from `bv`.
std::vector<double> extend_lattice(const QuadratureGeometry& geom, const Field& u, const BoundaryValues& bv);

/// sum over lattice, block and tail nodes of w * delta u for second-moment
/// weights on a symmetric layout. `far_sum` is tail_far_sum(geom, bv, w.tail),
/// empty for a zero far field.
Field apply_second_differences(const QuadratureGeometry& geom, const QuadratureWeights& w, const Field& u,
                               const BoundaryValues& bv, const std::vector<double>& far_sum);

}  // namespace fracobstacle
