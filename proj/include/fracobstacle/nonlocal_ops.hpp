#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fracobstacle/grid.hpp"
#include "fracobstacle/quadrature.hpp"

namespace fracobstacle {

/// c_{d,s} = 4^s Gamma(d/2+s) / (pi^{d/2} |Gamma(-s)|): the constant giving
/// (-Delta)^s the Fourier symbol |xi|^{2s}.
double normalization_constant(int dim, double s);

/// u(x_i + y) + u(x_i - y) - 2 u(x_i) with y = offset * h; points off the
/// box are read from `far`.
double second_difference(const Field& u, std::size_t i, std::array<int, 2> offset, const FarField& far);

/// Translation-invariant kernel K(y) = k(y) / |y|^{d+2 sigma} with an even
/// profile k bounded in [lambda, Lambda].
struct KernelSpec {
    std::string name = "constant";
    double sigma = 0.3;
    double lambda = 1.0;
    double Lambda = 1.0;
    KernelProfile profile;

    /// k == c.
    static KernelSpec constant(double sigma, double c);
    /// c_{d,sigma}/2 profile, so that the operator equals -(-Delta)^sigma.
    static KernelSpec fractional(int dim, double sigma);
    /// lambda + (Lambda - lambda) * (1 + sin(freq*|y| + phase)) / 2.
    static KernelSpec oscillating(double sigma, double lambda, double Lambda, double freq, double phase);
    /// lambda + (Lambda - lambda) * (y.e)^2 / |y|^2 with e at angle `angle`.
    static KernelSpec anisotropic(double sigma, double lambda, double Lambda, double angle);

    [[nodiscard]] double value(const Point& y, int dim) const;
};

enum class IVariantKind { zero, linear, pucci_sup, g_integrand };

std::string to_string(IVariantKind kind);
IVariantKind i_variant_from_string(const std::string& name);

struct OperatorParams {
    int dim = 1;
    double s = 0.75;
    double sigma = 0.3;
    double lambda = 1.0;
    double Lambda = 1.0;
    std::vector<double> b{0.0};
    double r = 0.0;
    IVariantKind i_variant = IVariantKind::zero;
    std::vector<KernelSpec> kernels;  // one for linear, the family for pucci_sup
    bool upwind = false;

    [[nodiscard]] double a() const noexcept { return 1.0 - 2.0 * s; }
    [[nodiscard]] double gamma() const noexcept;
    /// Throws ConfigError naming the violated assumption.
    void validate() const;
};

struct TailReport {
    double bound = 0.0;  // Lambda * osc(u) * R_tail^{-2 sigma}
    bool warning = false;
};

struct SandwichReport {
    double lower_violation = 0.0;  // max of M^-(u-v) - (Iu - Iv)
    double upper_violation = 0.0;  // max of (Iu - Iv) - M^+(u-v)
    [[nodiscard]] double worst() const noexcept { return std::max(lower_violation, upper_violation); }
};

/// Every nonlocal and lower-order operator on one grid, sharing one
/// quadrature layout and one set of far-field samples.
///
/// Operators are affine in u because of the far field: `homogeneous = true`
/// drops the far-field contribution and returns the linear part, which is
/// what implicit solves need.
class OperatorSet {
public:
    OperatorSet(const Grid& grid, OperatorParams params, QuadratureConfig quad, FarField far);
    ~OperatorSet();
    OperatorSet(OperatorSet&&) noexcept;
    OperatorSet& operator=(OperatorSet&&) noexcept;

    [[nodiscard]] const Grid& grid() const noexcept;
    [[nodiscard]] const OperatorParams& params() const noexcept;
    [[nodiscard]] const QuadratureConfig& quadrature() const noexcept;
    [[nodiscard]] const FarField& far() const noexcept;

    /// (-Delta)^s u.
    [[nodiscard]] Field frac_laplacian(const Field& u, bool homogeneous = false) const;
    /// int delta u(x,y) K(y) dy; the envelope of `kernel` is checked at every node.
    [[nodiscard]] Field kernel_operator(const Field& u, const KernelSpec& kernel, bool homogeneous = false) const;
    /// M^+ (sign > 0) or M^- (sign < 0) of order sigma with bounds lambda, Lambda.
    [[nodiscard]] Field pucci(const Field& u, int sign, bool homogeneous = false) const;
    [[nodiscard]] Field i_apply(const Field& u, bool homogeneous = false) const;
    /// Centered differences per axis, far-field ghosts at the box edge.
    [[nodiscard]] std::vector<Field> gradient(const Field& u, bool homogeneous = false) const;
    /// I u + b . grad u + r u.
    [[nodiscard]] Field lower_order(const Field& u, bool homogeneous = false) const;

    [[nodiscard]] TailReport tail_report(const Field& u) const;
    [[nodiscard]] SandwichReport sandwich_check(const Field& u, const Field& v) const;

    /// Diagonal entry of the discrete (-Delta)^s (same at every node).
    [[nodiscard]] double frac_laplacian_diagonal() const;
    /// Bound on the magnitude of the diagonal of the discrete lower-order part.
    [[nodiscard]] double lower_order_diagonal_bound() const;
    /// Dense row-major matrix of the homogeneous (-Delta)^s; d = 1 only.
    [[nodiscard]] std::vector<double> frac_laplacian_matrix() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Field frac_laplacian(const Field& u, const OperatorParams& params, const QuadratureConfig& quad, const FarField& far);
Field kernel_operator(const Field& u, const KernelSpec& kernel, const QuadratureConfig& quad, const FarField& far);
Field pucci(const Field& u, const OperatorParams& params, int sign, const QuadratureConfig& quad, const FarField& far);
Field i_apply(const Field& u, const OperatorParams& params, const QuadratureConfig& quad, const FarField& far);
std::vector<Field> gradient(const Field& u, const FarField& far);
Field lower_order_apply(const Field& u, const OperatorParams& params, const QuadratureConfig& quad, const FarField& far);
SandwichReport sandwich_check(const Field& u, const Field& v, const OperatorParams& params,
                              const QuadratureConfig& quad, const FarField& far);

}  // namespace fracobstacle
