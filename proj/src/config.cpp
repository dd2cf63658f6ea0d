#include "fracobstacle/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fracobstacle/error.hpp"

namespace fracobstacle {

namespace {

void allow_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> keys) {
    if (!node.IsMap()) throw ConfigError("config: '" + where + "' must be a mapping");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw ConfigError("config: unknown key '" + where + "." + key + "'");
    }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
    const YAML::Node v = node[key];
    if (!v) return;
    try {
        out = v.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config: bad value for '" + where + "." + key + "'");
    }
}

YAML::Node require(const YAML::Node& node, const char* key, const std::string& where) {
    const YAML::Node v = node[key];
    if (!v) throw ConfigError("config: missing block '" + where + (where.empty() ? "" : ".") + key + "'");
    return v;
}

Grid parse_grid(const YAML::Node& n) {
    allow_keys(n, "problem.grid", {"dim", "half_width", "n"});
    int dim = 1;
    double L = 1.0;
    int points = 17;
    read(n, "dim", dim, "problem.grid");
    read(n, "half_width", L, "problem.grid");
    read(n, "n", points, "problem.grid");
    return build_grid(dim, L, points);
}

ObstacleSpec parse_obstacle(const YAML::Node& n, int dim) {
    allow_keys(n, "problem.obstacle", {"kind", "amplitude", "scale", "center", "strike", "delta", "offset"});
    ObstacleSpec o;
    o.dim = dim;
    std::string kind = "bump";
    read(n, "kind", kind, "problem.obstacle");
    o.kind = obstacle_kind_from_string(kind);
    if (o.kind == ObstacleKind::tabulated) throw ConfigError("config: tabulated obstacles cannot be configured");
    read(n, "amplitude", o.amplitude, "problem.obstacle");
    read(n, "scale", o.scale, "problem.obstacle");
    read(n, "strike", o.strike, "problem.obstacle");
    read(n, "delta", o.delta, "problem.obstacle");
    read(n, "offset", o.offset, "problem.obstacle");
    std::vector<double> c;
    read(n, "center", c, "problem.obstacle");
    if (!c.empty()) {
        if (static_cast<int>(c.size()) != dim) throw ConfigError("config: obstacle center needs one entry per dimension");
        o.center = {c[0], dim == 2 ? c[1] : 0.0};
    }
    return o;
}

KernelDescriptor parse_kernel(const YAML::Node& n) {
    allow_keys(n, "problem.operator.kernels[]", {"type", "c", "lambda", "Lambda", "freq", "phase", "angle"});
    KernelDescriptor k;
    const std::string w = "problem.operator.kernels[]";
    read(n, "type", k.type, w);
    read(n, "c", k.c, w);
    read(n, "lambda", k.lambda, w);
    read(n, "Lambda", k.Lambda, w);
    read(n, "freq", k.freq, w);
    read(n, "phase", k.phase, w);
    read(n, "angle", k.angle, w);
    return k;
}

void parse_operator(const YAML::Node& n, RunConfig& c) {
    const std::string w = "problem.operator";
    allow_keys(n, w, {"s", "sigma", "lambda", "Lambda", "b", "r", "i_variant", "upwind", "kernels"});
    OperatorParams& p = c.op;
    p.dim = c.grid.dim;
    p.b.assign(p.dim, 0.0);
    read(n, "s", p.s, w);
    read(n, "sigma", p.sigma, w);
    read(n, "lambda", p.lambda, w);
    read(n, "Lambda", p.Lambda, w);
    read(n, "b", p.b, w);
    read(n, "r", p.r, w);
    read(n, "upwind", p.upwind, w);
    std::string variant = "zero";
    read(n, "i_variant", variant, w);
    p.i_variant = i_variant_from_string(variant);
    if (const YAML::Node ks = n["kernels"]) {
        if (!ks.IsSequence()) throw ConfigError("config: 'problem.operator.kernels' must be a list");
        for (const auto& k : ks) c.kernels.push_back(parse_kernel(k));
    }
}

MarketParams parse_market(const YAML::Node& n) {
    const std::string w = "problem.market";
    allow_keys(n, w, {"r", "d", "s", "sigma", "strike"});
    MarketParams m;
    read(n, "r", m.r, w);
    read(n, "d", m.d, w);
    read(n, "s", m.s, w);
    read(n, "sigma", m.sigma, w);
    read(n, "strike", m.strike, w);
    return m;
}

QuadratureConfig parse_quadrature(const YAML::Node& n) {
    const std::string w = "problem.quadrature";
    allow_keys(n, w, {"taylor_cells", "tail_radius_factor", "radial_nodes", "angular_nodes", "angular_sub", "tolerance"});
    QuadratureConfig q;
    read(n, "taylor_cells", q.taylor_cells, w);
    read(n, "tail_radius_factor", q.tail_radius_factor, w);
    read(n, "radial_nodes", q.radial_nodes, w);
    read(n, "angular_nodes", q.angular_nodes, w);
    read(n, "angular_sub", q.angular_sub, w);
    read(n, "tolerance", q.tolerance, w);
    return q;
}

PenaltyConfig parse_solver(const YAML::Node& n) {
    const std::string w = "solver";
    allow_keys(n, w, {"eps", "dt", "T", "scheme", "picard_tol", "picard_max", "snapshot_every", "beta_ceiling"});
    PenaltyConfig s;
    read(n, "eps", s.eps, w);
    read(n, "dt", s.dt, w);
    read(n, "T", s.T, w);
    std::string scheme = "imex";
    read(n, "scheme", scheme, w);
    s.scheme = scheme_from_string(scheme);
    read(n, "picard_tol", s.picard_tol, w);
    read(n, "picard_max", s.picard_max, w);
    read(n, "snapshot_every", s.snapshot_every, w);
    read(n, "beta_ceiling", s.beta_ceiling, w);
    return s;
}

AnalysisConfig parse_analysis(const YAML::Node& n) {
    const std::string w = "analysis";
    allow_keys(n, w, {"diagnostics", "report_only", "eps_sweep", "slice", "comparison_shift", "extension"});
    AnalysisConfig a;
    read(n, "diagnostics", a.diagnostics, w);
    read(n, "report_only", a.report_only, w);
    read(n, "eps_sweep", a.eps_sweep, w);
    read(n, "slice", a.slice, w);
    read(n, "comparison_shift", a.comparison_shift, w);
    if (const YAML::Node e = n["extension"]) {
        allow_keys(e, "analysis.extension", {"levels", "grading", "height"});
        read(e, "levels", a.extension_levels, "analysis.extension");
        read(e, "grading", a.extension_grading, "analysis.extension");
        read(e, "height", a.extension_height, "analysis.extension");
    }
    return a;
}

YAML::Node flow_seq(const std::vector<double>& v) {
    YAML::Node n(YAML::NodeType::Sequence);
    for (double x : v) n.push_back(x);
    n.SetStyle(YAML::EmitterStyle::Flow);
    return n;
}

YAML::Node flow_seq(const std::vector<std::string>& v) {
    YAML::Node n(YAML::NodeType::Sequence);
    for (const auto& x : v) n.push_back(x);
    n.SetStyle(YAML::EmitterStyle::Flow);
    return n;
}

}  // namespace

const std::vector<std::string>& known_diagnostics() {
    static const std::vector<std::string> names{
        "operator_symbol", "sandwich",      "penalization",  "penalty_bound",        "comparison",
        "time_monotonicity", "lipschitz",   "sign_structure", "flux_identity",       "eigenvalue",
        "decay",           "monotonicity_formula", "time_exponent", "ladder",        "picard",
        "semiconvexity",   "holder",        "vtilde",        "convex_hull",          "obstacle_sign_structure"};
    return names;
}

KernelSpec KernelDescriptor::build(int dim, double sigma) const {
    if (type == "constant") return KernelSpec::constant(sigma, c);
    if (type == "fractional") return KernelSpec::fractional(dim, sigma);
    if (type == "oscillating") return KernelSpec::oscillating(sigma, lambda, Lambda, freq, phase);
    if (type == "anisotropic") return KernelSpec::anisotropic(sigma, lambda, Lambda, angle);
    throw ConfigError("config: unknown kernel type '" + type + "'");
}

void MarketParams::validate() const {
    if (!(s > 0.5 && s < 1.0)) throw ConfigError("market: assumption 1/2 < s < 1 violated (s = " + std::to_string(s) + ")");
    if (!(sigma > 0.0 && sigma < s)) {
        throw ConfigError("market: assumption 0 < sigma < s violated (sigma = " + std::to_string(sigma) +
                          ", s = " + std::to_string(s) + ")");
    }
    if (d.empty() || d.size() > 2) throw ConfigError("market: one or two dividend rates are required");
    if (!std::isfinite(r)) throw ConfigError("market: short rate must be finite");
    if (!(strike > 0.0)) throw ConfigError("market: strike must be positive");
}

OperatorParams merton_map(const MarketParams& m) {
    m.validate();
    OperatorParams p;
    p.dim = static_cast<int>(m.d.size());
    p.s = m.s;
    p.sigma = m.sigma;
    p.r = m.r;
    p.lambda = p.Lambda = 1.0;
    p.b.clear();
    for (double di : m.d) p.b.push_back(di - m.r);
    p.i_variant = IVariantKind::linear;
    p.kernels = {KernelSpec::constant(m.sigma, 1.0)};
    return p;
}

OperatorParams RunConfig::operator_params() const {
    if (market) return merton_map(*market);
    OperatorParams p = op;
    p.kernels.clear();
    for (const auto& k : kernels) p.kernels.push_back(k.build(p.dim, p.sigma));
    return p;
}

Problem RunConfig::problem() const {
    Problem pr;
    pr.grid = grid;
    pr.obstacle = obstacle;
    if (market && obstacle.kind == ObstacleKind::mollified_put) pr.obstacle.strike = market->strike;
    pr.params = operator_params();
    pr.quad = quad;
    return pr;
}

ExtensionParams RunConfig::extension_params() const {
    ExtensionParams e;
    e.s = operator_params().s;
    e.M = analysis.extension_levels;
    e.grading = analysis.extension_grading;
    e.Y = analysis.extension_height;
    e.quad = quad;
    return e;
}

void RunConfig::validate() const {
    if (obstacle.dim != grid.dim) throw ConfigError("config: obstacle dimension differs from grid dimension");
    obstacle.validate();
    if (market) {
        market->validate();
        if (static_cast<int>(market->d.size()) != grid.dim) throw ConfigError("config: market needs one dividend per dimension");
    }
    const OperatorParams p = operator_params();
    if (p.dim != grid.dim) throw ConfigError("config: operator dimension differs from grid dimension");
    p.validate();
    quad.validate();
    solver.validate();
    const auto& known = known_diagnostics();
    for (const auto* list : {&analysis.diagnostics, &analysis.report_only}) {
        for (const auto& d : *list) {
            if (std::find(known.begin(), known.end(), d) == known.end()) throw ConfigError("config: unknown diagnostic '" + d + "'");
        }
    }
    for (double e : analysis.eps_sweep) {
        if (!(e > 0.0)) throw ConfigError("config: eps_sweep entries must be positive");
    }
    if (!(analysis.slice > 0.0 && analysis.slice <= 1.0)) throw ConfigError("config: analysis.slice must lie in (0, 1]");
    if (analysis.extension_levels < 32) throw ConfigError("config: analysis.extension.levels must be >= 32");
    if (!(analysis.extension_grading >= 2.0)) throw ConfigError("config: analysis.extension.grading must be >= 2");
    if (output_dir.empty()) throw ConfigError("config: output directory must not be empty");
}

RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config: malformed file: ") + e.what());
    }
    if (!root || root.IsNull()) throw ConfigError("config: empty file");
    allow_keys(root, "", {"problem", "solver", "analysis", "output", "seed"});
    RunConfig c;
    const YAML::Node problem = require(root, "problem", "");
    allow_keys(problem, "problem", {"grid", "obstacle", "operator", "market", "quadrature"});
    c.grid = parse_grid(require(problem, "grid", "problem"));
    c.obstacle = parse_obstacle(require(problem, "obstacle", "problem"), c.grid.dim);
    const YAML::Node op = problem["operator"];
    const YAML::Node market = problem["market"];
    if (op && market) throw ConfigError("config: give either problem.operator or problem.market, not both");
    if (!op && !market) throw ConfigError("config: missing block 'problem.operator' (or 'problem.market')");
    c.op.dim = c.grid.dim;
    c.op.b.assign(c.grid.dim, 0.0);
    if (op) parse_operator(op, c);
    if (market) c.market = parse_market(market);
    if (const YAML::Node q = problem["quadrature"]) c.quad = parse_quadrature(q);
    if (const YAML::Node s = root["solver"]) c.solver = parse_solver(s);
    if (const YAML::Node a = root["analysis"]) c.analysis = parse_analysis(a);
    if (const YAML::Node o = root["output"]) {
        allow_keys(o, "output", {"dir"});
        read(o, "dir", c.output_dir, "output");
    }
    read(root, "seed", c.seed, "");
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    YAML::Node root;
    YAML::Node problem;
    problem["grid"]["dim"] = c.grid.dim;
    problem["grid"]["half_width"] = c.grid.half_width;
    problem["grid"]["n"] = c.grid.n;

    YAML::Node ob;
    ob["kind"] = to_string(c.obstacle.kind);
    ob["amplitude"] = c.obstacle.amplitude;
    ob["scale"] = c.obstacle.scale;
    ob["center"] = flow_seq(std::vector<double>(c.obstacle.center.begin(), c.obstacle.center.begin() + c.grid.dim));
    ob["strike"] = c.obstacle.strike;
    ob["delta"] = c.obstacle.delta;
    ob["offset"] = c.obstacle.offset;
    problem["obstacle"] = ob;

    if (c.market) {
        YAML::Node m;
        m["r"] = c.market->r;
        m["d"] = flow_seq(c.market->d);
        m["s"] = c.market->s;
        m["sigma"] = c.market->sigma;
        m["strike"] = c.market->strike;
        problem["market"] = m;
    } else {
        YAML::Node op;
        op["s"] = c.op.s;
        op["sigma"] = c.op.sigma;
        op["lambda"] = c.op.lambda;
        op["Lambda"] = c.op.Lambda;
        op["b"] = flow_seq(c.op.b);
        op["r"] = c.op.r;
        op["i_variant"] = to_string(c.op.i_variant);
        op["upwind"] = c.op.upwind;
        if (!c.kernels.empty()) {
            YAML::Node ks(YAML::NodeType::Sequence);
            for (const auto& k : c.kernels) {
                YAML::Node kn;
                kn["type"] = k.type;
                kn["c"] = k.c;
                kn["lambda"] = k.lambda;
                kn["Lambda"] = k.Lambda;
                kn["freq"] = k.freq;
                kn["phase"] = k.phase;
                kn["angle"] = k.angle;
                kn.SetStyle(YAML::EmitterStyle::Flow);
                ks.push_back(kn);
            }
            op["kernels"] = ks;
        }
        problem["operator"] = op;
    }

    YAML::Node q;
    q["taylor_cells"] = c.quad.taylor_cells;
    q["tail_radius_factor"] = c.quad.tail_radius_factor;
    q["radial_nodes"] = c.quad.radial_nodes;
    q["angular_nodes"] = c.quad.angular_nodes;
    q["angular_sub"] = c.quad.angular_sub;
    q["tolerance"] = c.quad.tolerance;
    problem["quadrature"] = q;
    root["problem"] = problem;

    YAML::Node s;
    s["eps"] = c.solver.eps;
    s["dt"] = c.solver.dt;
    s["T"] = c.solver.T;
    s["scheme"] = to_string(c.solver.scheme);
    s["picard_tol"] = c.solver.picard_tol;
    s["picard_max"] = c.solver.picard_max;
    s["snapshot_every"] = c.solver.snapshot_every;
    s["beta_ceiling"] = c.solver.beta_ceiling;
    root["solver"] = s;

    YAML::Node a;
    a["diagnostics"] = flow_seq(c.analysis.diagnostics);
    a["report_only"] = flow_seq(c.analysis.report_only);
    a["eps_sweep"] = flow_seq(c.analysis.eps_sweep);
    a["slice"] = c.analysis.slice;
    a["comparison_shift"] = c.analysis.comparison_shift;
    a["extension"]["levels"] = c.analysis.extension_levels;
    a["extension"]["grading"] = c.analysis.extension_grading;
    a["extension"]["height"] = c.analysis.extension_height;
    root["analysis"] = a;
    root["output"]["dir"] = c.output_dir;
    root["seed"] = c.seed;

    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << root;
    return std::string(out.c_str()) + "\n";
}

}  // namespace fracobstacle
