#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracobstacle/config.hpp"
#include "fracobstacle/extension.hpp"
#include "fracobstacle/penalty_solver.hpp"
#include "fracobstacle/regularity.hpp"

namespace fracobstacle {

/// One judged quantity: `band` states what `value` was judged against.
struct Diagnostic {
    std::string quantity;
    double value = 0.0;
    std::string band;
    std::string range;
    bool pass = true;
    bool enforced = true;
};

void write_report_csv(std::ostream& out, const std::vector<Diagnostic>& rows);
bool all_enforced_pass(const std::vector<Diagnostic>& rows);

/// CSV `t,x,value` (`t,x0,x1,value` in 2D), snapshot-major.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

// Measurement studies shared by the CLI and the acceptance suite. They
// return numbers; judging them is left to the caller.

struct SymbolStudy {
    double rel_linf = 0.0;  // on |x| <= 4
    double runtime_s = 0.0;
};

/// Quadrature (-Delta)^s of exp(-x^2/2) against the DFT symbol, d = 1.
SymbolStudy symbol_study(double s, int n, double half_width, const QuadratureConfig& quad);

struct SandwichStudy {
    double worst = 0.0;  // max violation over all pairs and nodes
    int pairs = 0;
    double runtime_s = 0.0;
};

/// Random smooth pairs (sums of Gaussians) drawn from `seed`.
SandwichStudy sandwich_study(const Problem& problem, int pairs, std::uint64_t seed);

struct SweepEntry {
    double eps = 0.0;
    double distance = 0.0;  // ||u_eps(T) - u_projected(T)||_inf
    double max_beta = 0.0;
    double runtime_s = 0.0;
};

struct PenaltySweep {
    std::vector<SweepEntry> entries;
    double psi_norm = 0.0;
    double reference_runtime_s = 0.0;
};

/// Penalized runs at each eps (dt = eps/4 unless `base.dt` is set) against
/// one projected reference.
PenaltySweep penalty_sweep(const Problem& problem, const PenaltyConfig& base, const std::vector<double>& eps);

struct FluxStudy {
    double rel_l2 = 0.0;  // on the interior half of the grid
    std::size_t flagged = 0;
    double runtime_s = 0.0;
};

/// normal_flux(extend(g)) against the direct quadrature of (-Delta)^s g for a
/// centred Gaussian g, d = 1.
FluxStudy flux_study(double s, int n, double half_width, int levels, const QuadratureConfig& quad);

/// Snapshot index nearest to `fraction` of the horizon.
std::size_t slice_index(const Trajectory& traj, double fraction);
/// Contact tolerance matching the scheme that produced the trajectory.
double contact_tolerance(const Problem& problem, const PenaltyConfig& config);
/// Continuation-side neighbour `cells` away from the probe point.
std::size_t continuation_node(const ContactMask& mask, std::size_t probe, int cells);
/// Dyadic radii from L/4 down to 8h.
std::vector<double> decay_radii(const Grid& grid);
/// Dyadic radii from min(1, L, Y, room in the box) down to 8h.
std::vector<double> phi_radii(const ExtensionField& ext_w);

/// Regularity diagnostics of one trajectory under `config`.
std::vector<Diagnostic> analyze(const RunConfig& config, const PenaltySolver& solver, const Trajectory& traj);

/// Subcommands; each writes CSVs under `out_dir` and returns an exit code.
int command_validate_ops(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int command_solve(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int command_analyze(const RunConfig& config, const std::string& trajectory_csv, const std::string& out_dir,
                    std::ostream& log);
int command_extend(const RunConfig& config, const std::string& out_dir, std::ostream& log);
int command_eigcheck(const std::vector<double>& s_values, int resolution, const std::string& out_dir, std::ostream& log);
int command_oracle(const std::string& check, const std::string& out_dir, std::ostream& log);
int command_sweep(const RunConfig& config, const std::string& out_dir, std::ostream& log);
/// solve, analyze and the enabled extension/eigenvalue diagnostics.
int run(const RunConfig& config, const std::string& out_dir, std::ostream& log);

}  // namespace fracobstacle
