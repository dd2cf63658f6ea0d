#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fracobstacle {

/// Point in R^d, d <= 2. Unused trailing coordinates are zero.
using Point = std::array<double, 2>;

/// Uniform lattice on the box [-L, L]^d with n points per axis.
///
/// Nodes are x_i = -L + i*h with h = 2L/(n-1). n is odd so that the
/// origin is always a node. Flat indices are row-major: for d = 2 the
/// node (i0, i1) has index i0*n + i1.
struct Grid {
    int dim = 1;
    double half_width = 1.0;
    int n = 17;
    double h = 0.125;

    [[nodiscard]] std::size_t size() const noexcept;
    [[nodiscard]] double coord(int i) const noexcept { return -half_width + i * h; }
    [[nodiscard]] Point node(std::size_t idx) const noexcept;
    [[nodiscard]] std::array<int, 2> multi_index(std::size_t idx) const noexcept;
    [[nodiscard]] std::size_t flat_index(int i0, int i1 = 0) const noexcept;
    [[nodiscard]] bool contains_index(int i0, int i1 = 0) const noexcept;
    /// Index of the node at the origin.
    [[nodiscard]] std::size_t center() const noexcept;

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Builds a grid; n must be odd and at least `min_points`.
Grid build_grid(int dim, double half_width, int n, int min_points = 17);

/// Samples of a scalar function on a grid.
struct Field {
    Grid grid;
    std::vector<double> values;

    Field() = default;
    explicit Field(const Grid& g, double fill = 0.0);
    Field(const Grid& g, std::vector<double> v);

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    [[nodiscard]] double max_abs() const;
    [[nodiscard]] bool all_finite() const;
};

Field operator-(const Field& a, const Field& b);
Field operator+(const Field& a, const Field& b);
Field operator*(double alpha, const Field& a);

/// Samples a function of position at every node.
Field sample(const Grid& grid, const std::function<double(const Point&)>& f);

/// Time-ordered snapshots on a shared grid, uniformly spaced by `dt`.
struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<Field> fields;

    void push(double t, Field f);
    [[nodiscard]] std::size_t size() const noexcept { return fields.size(); }
    [[nodiscard]] const Grid& grid() const { return fields.front().grid; }
};

enum class ObstacleKind { bump, gaussian, mollified_put, tabulated };

std::string to_string(ObstacleKind kind);
ObstacleKind obstacle_kind_from_string(const std::string& name);

/// Closed-form obstacle evaluable on all of R^d.
///
///   bump          A * max(0, 1 - |x-c|^2/rho^2)^3 + offset
///   gaussian      A * exp(-|x-c|^2 / (2 rho^2)) + offset
///   mollified_put (eta_delta * max(K - mean_i e^{x_i}, 0)) * A + offset
///   tabulated     grid samples, extended by `offset` outside the box
struct ObstacleSpec {
    ObstacleKind kind = ObstacleKind::bump;
    int dim = 1;
    double amplitude = 1.0;
    double scale = 1.0;
    Point center{0.0, 0.0};
    double strike = 1.0;
    double delta = 0.0;  // put mollification radius
    double offset = 0.0;
    std::vector<double> table;  // tabulated kind only
    Grid table_grid{};

    [[nodiscard]] double evaluate(const Point& x) const;
    void validate() const;
};

/// Obstacle samples at the grid nodes.
Field sample_obstacle(const ObstacleSpec& spec, const Grid& grid);

/// Value of the solution outside the computational box; the solution is
/// extended by the obstacle there.
double far_field(const ObstacleSpec& spec, const Point& x);

/// Normalised standard mollifier eta(x) = c exp(1/(|x|^2-1)) on |x| < 1.
double mollifier(double r, int dim);

struct Mollified {
    Field field;
    bool resolved = true;  // false when eps < h and the raw sample was returned
};

/// Discrete convolution psi_eps = eta_eps * psi over the lattice points
/// within distance eps, normalised by the discrete kernel mass.
Mollified mollify(const ObstacleSpec& spec, const Grid& grid, double eps);

/// CSV with header `x0[,x1],value`, row-major, 17 significant digits.
void write_field_csv(std::ostream& out, const Field& field);
void write_field_csv(const std::string& path, const Field& field);
Field read_field_csv(std::istream& in);
Field read_field_csv(const std::string& path);

}  // namespace fracobstacle
