#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fracobstacle/config.hpp"
#include "fracobstacle/error.hpp"
#include "fracobstacle/extension.hpp"
#include "fracobstacle/nonlocal_ops.hpp"
#include "fracobstacle/penalty_solver.hpp"
#include "fracobstacle/regularity.hpp"
#include "fracobstacle/runner.hpp"
#include "fracobstacle/spectral_oracle.hpp"

namespace py = pybind11;
using namespace fracobstacle;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

int array_dim(const Array& a) {
    if (a.ndim() == 1) return 1;
    if (a.ndim() == 2 && a.shape(0) == a.shape(1)) return 2;
    throw ConfigError("expected a 1-D array or a square 2-D array");
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array to_array(const std::vector<double>& v, int dim, int n) {
    std::vector<py::ssize_t> shape;
    if (dim == 1) {
        shape = {static_cast<py::ssize_t>(v.size())};
    } else {
        shape = {n, n};
    }
    Array out(shape);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Field box_field(const Array& values, double half_width) {
    const int dim = array_dim(values);
    const Grid g = build_grid(dim, half_width, static_cast<int>(values.shape(0)));
    return Field(g, to_vector(values));
}

PeriodicField periodic_field(const Array& values, double half_width) {
    PeriodicField p;
    p.dim = array_dim(values);
    p.half_width = half_width;
    p.n = static_cast<int>(values.shape(0));
    p.values = to_vector(values);
    p.validate();
    return p;
}

Array node_coordinates(const Grid& g) {
    Array out({static_cast<py::ssize_t>(g.size()), static_cast<py::ssize_t>(g.dim)});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.node(i);
        for (int k = 0; k < g.dim; ++k) m(i, k) = x[k];
    }
    return out;
}

py::dict trajectory_dict(const Trajectory& traj) {
    const Grid& g = traj.grid();
    Array values({static_cast<py::ssize_t>(traj.size()), static_cast<py::ssize_t>(g.size())});
    auto m = values.mutable_unchecked<2>();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        for (std::size_t i = 0; i < g.size(); ++i) m(k, i) = traj.fields[k][i];
    }
    py::dict d;
    d["times"] = traj.times;
    d["dt"] = traj.dt;
    d["values"] = values;
    d["coords"] = node_coordinates(g);
    d["dim"] = g.dim;
    d["n"] = g.n;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Penalized fractional obstacle problems";

    m.def("normalization_constant", &normalization_constant, py::arg("dim"), py::arg("s"));
    m.def("poisson_constant", &poisson_constant, py::arg("dim"), py::arg("s"));
    m.def("flux_scale", &flux_scale, py::arg("dim"), py::arg("s"));
    m.def("beta", py::vectorize([](double x, double eps) { return beta(x, eps); }), py::arg("x"), py::arg("eps"),
          "Penalty exp(-x/eps), clamped at 1e12.");

    m.def(
        "frac_laplacian",
        [](const Array& values, double half_width, double s, double far) {
            const Field u = box_field(values, half_width);
            OperatorParams p;
            p.dim = u.grid.dim;
            p.s = s;
            p.b.assign(p.dim, 0.0);
            p.validate();
            Field out;
            {
                py::gil_scoped_release release;
                out = frac_laplacian(u, p, QuadratureConfig{}, [far](const Point&) { return far; });
            }
            return to_array(out.values, u.grid.dim, u.grid.n);
        },
        py::arg("values"), py::arg("half_width"), py::arg("s"), py::arg("far") = 0.0,
        "(-Delta)^s of box samples on [-L, L]^d; the function equals `far` outside the box.");

    m.def(
        "dft_frac_laplacian",
        [](const Array& values, double half_width, double s) {
            const PeriodicField p = periodic_field(values, half_width);
            return to_array(dft_frac_laplacian(p, s).values, p.dim, p.n);
        },
        py::arg("values"), py::arg("half_width"), py::arg("s"));
    m.def(
        "heat_evolve",
        [](const Array& values, double half_width, double t, double s) {
            const PeriodicField p = periodic_field(values, half_width);
            return to_array(heat_evolve(p, t, s).values, p.dim, p.n);
        },
        py::arg("values"), py::arg("half_width"), py::arg("t"), py::arg("s"));

    m.def(
        "exponent_ladder",
        [](double s, double alpha0, int k_max) {
            const Ladder l = exponent_ladder(s, alpha0, k_max);
            py::dict d;
            d["alphas"] = l.alphas;
            d["fixed_point"] = l.fixed_point;
            d["ratio"] = l.ratio;
            return d;
        },
        py::arg("s"), py::arg("alpha0"), py::arg("k_max"));
    m.def("halfsphere_rayleigh", py::overload_cast<int, double, int>(&halfsphere_rayleigh), py::arg("dim"),
          py::arg("s"), py::arg("resolution"), "Rayleigh quotient of the homogeneous solution on the half sphere.");

    py::class_<RunConfig>(m, "Config")
        .def_static("load", &load_config, py::arg("path"))
        .def_static("parse", &parse_config, py::arg("text"))
        .def("to_yaml", &serialize_config)
        .def("validate", &RunConfig::validate)
        .def_property_readonly("dim", [](const RunConfig& c) { return c.grid.dim; })
        .def_property_readonly("n", [](const RunConfig& c) { return c.grid.n; })
        .def_property_readonly("half_width", [](const RunConfig& c) { return c.grid.half_width; })
        .def_property(
            "eps", [](const RunConfig& c) { return c.solver.eps; },
            [](RunConfig& c, double v) { c.solver.eps = v; })
        .def_property(
            "T", [](const RunConfig& c) { return c.solver.T; }, [](RunConfig& c, double v) { c.solver.T = v; })
        .def_property(
            "dt", [](const RunConfig& c) { return c.solver.dt; }, [](RunConfig& c, double v) { c.solver.dt = v; })
        .def_property(
            "scheme", [](const RunConfig& c) { return to_string(c.solver.scheme); },
            [](RunConfig& c, const std::string& v) { c.solver.scheme = scheme_from_string(v); })
        .def_property(
            "diagnostics", [](const RunConfig& c) { return c.analysis.diagnostics; },
            [](RunConfig& c, const std::vector<std::string>& v) { c.analysis.diagnostics = v; })
        .def("__repr__", [](const RunConfig& c) {
            return "<Config dim=" + std::to_string(c.grid.dim) + " n=" + std::to_string(c.grid.n) +
                   " scheme=" + to_string(c.solver.scheme) + ">";
        });

    m.def(
        "obstacle",
        [](const RunConfig& c) {
            const Problem p = c.problem();
            return to_array(sample_obstacle(p.obstacle, p.grid).values, p.grid.dim, p.grid.n);
        },
        py::arg("config"));

    m.def(
        "solve",
        [](const RunConfig& c) {
            c.validate();
            SolveReport rep;
            {
                py::gil_scoped_release release;
                rep = PenaltySolver(c.problem(), c.solver).solve();
            }
            py::dict d = trajectory_dict(rep.trajectory);
            d["max_beta"] = rep.max_beta;
            d["min_slack"] = rep.min_slack;
            d["monotonicity_violation"] = rep.monotonicity_violation;
            d["steps"] = rep.steps;
            d["runtime_s"] = rep.runtime_s;
            return d;
        },
        py::arg("config"), "Runs the configured scheme and returns the trajectory with run statistics.");

    m.def(
        "diagnostics",
        [](const RunConfig& c) {
            c.validate();
            std::vector<Diagnostic> rows;
            {
                py::gil_scoped_release release;
                const PenaltySolver solver(c.problem(), c.solver);
                const Trajectory traj = solver.solve().trajectory;
                rows = analyze(c, solver, traj);
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["quantity"] = r.quantity;
                d["value"] = r.value;
                d["band"] = r.band;
                d["range"] = r.range;
                d["pass"] = r.pass;
                d["enforced"] = r.enforced;
                out.append(d);
            }
            return out;
        },
        py::arg("config"), "Solves and evaluates the configured diagnostics.");
}
