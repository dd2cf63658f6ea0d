#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fracobstacle/extension.hpp"
#include "fracobstacle/grid.hpp"
#include "fracobstacle/nonlocal_ops.hpp"
#include "fracobstacle/penalty_solver.hpp"

namespace fracobstacle {

/// Serializable description of one kernel of the lower-order operator.
struct KernelDescriptor {
    std::string type = "constant";  // constant | fractional | oscillating | anisotropic
    double c = 1.0;                 // constant
    double lambda = 1.0;            // oscillating, anisotropic
    double Lambda = 1.0;
    double freq = 1.0;              // oscillating
    double phase = 0.0;
    double angle = 0.0;             // anisotropic

    [[nodiscard]] KernelSpec build(int dim, double sigma) const;
    friend bool operator==(const KernelDescriptor&, const KernelDescriptor&) = default;
};

/// Market inputs of the pricing problem with zero diffusion.
struct MarketParams {
    double r = 0.05;
    std::vector<double> d{0.02};
    double s = 0.75;
    double sigma = 0.3;
    double strike = 1.0;

    void validate() const;
    friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

/// b_i = d_i - r, r, s and sigma copied, linear I with kernel 1/|y|^{d+2 sigma}.
OperatorParams merton_map(const MarketParams& m);

struct AnalysisConfig {
    std::vector<std::string> diagnostics;
    std::vector<std::string> report_only;  // computed and reported, not counted in the exit code
    std::vector<double> eps_sweep;
    double slice = 0.5;  // analysis slice as a fraction of the horizon
    double comparison_shift = 0.1;
    int extension_levels = 64;
    double extension_grading = 3.0;
    double extension_height = 0.0;  // 0 selects L/2

    friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

struct RunConfig {
    Grid grid;
    ObstacleSpec obstacle;
    OperatorParams op;
    std::vector<KernelDescriptor> kernels;
    std::optional<MarketParams> market;
    QuadratureConfig quad;
    PenaltyConfig solver;
    AnalysisConfig analysis;
    std::string output_dir = "out";
    std::uint64_t seed = 0;

    /// Operator parameters with kernels built (or the market mapping applied).
    [[nodiscard]] OperatorParams operator_params() const;
    [[nodiscard]] Problem problem() const;
    [[nodiscard]] ExtensionParams extension_params() const;
    /// Throws ConfigError on inconsistent blocks.
    void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// Names accepted in analysis.diagnostics.
const std::vector<std::string>& known_diagnostics();

}  // namespace fracobstacle
