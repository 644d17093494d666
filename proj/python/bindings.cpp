/// @file bindings.cpp
/// @brief Python module exposing configuration, solvers, sweeps and the test-function verifier.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lmfsi/config.hpp"
#include "lmfsi/constitutive.hpp"
#include "lmfsi/errors.hpp"
#include "lmfsi/harness.hpp"
#include "lmfsi/incompressible.hpp"
#include "lmfsi/testfunctions.hpp"

namespace py = pybind11;
using namespace lmfsi;

namespace {

py::array_t<double> as_array(const std::vector<double>& data, int rows, int cols) {
    py::array_t<double> out({rows, cols});
    std::copy(data.begin(), data.end(), out.mutable_data());
    return out;
}

py::array_t<double> to_numpy(const ScalarField& f) { return as_array(f.data(), f.ny(), f.nx()); }

py::tuple to_numpy(const VectorField& v) {
    return py::make_tuple(as_array(v.xs(), v.ny(), v.nx() + 1), as_array(v.ys(), v.ny() + 1, v.nx()));
}

py::dict row_dict(const SweepRow& r) {
    py::dict d;
    d["eps"] = r.eps;
    d["sup_rho_err"] = r.sup_rho_err;
    d["u_err_L2W12"] = r.u_err_L2W12;
    d["kinetic_gap"] = r.kinetic_gap;
    d["eps_hdot_max"] = r.eps_hdot_max;
    d["energy_violation"] = r.energy_violation;
    d["theorem_regime"] = r.theorem_regime;
    return d;
}

py::dict trajectory_dict(const Trajectory& tr, bool fields) {
    py::list energy, snaps;
    for (const EnergyRow& r : tr.energy) {
        py::dict e;
        e["t"] = r.t;
        e["kinetic"] = r.energy.kinetic;
        e["pressure_energy"] = r.energy.pressure_energy;
        e["dissipation_accum"] = r.energy.dissipation_accum;
        e["body_exchange"] = r.energy.body_exchange;
        e["total"] = r.energy.total;
        e["mass"] = r.mass;
        e["eps_hdot"] = r.eps_hdot;
        energy.append(e);
    }
    for (const Snapshot& s : tr.snapshots) {
        py::dict d;
        d["t"] = s.t;
        d["h"] = py::make_tuple(s.body.h.x, s.body.h.y);
        d["h_dot"] = py::make_tuple(s.body.h_dot.x, s.body.h_dot.y);
        if (fields && !s.rho.data().empty()) {
            d["rho"] = to_numpy(s.rho);
            d["u"] = to_numpy(s.u);
        }
        snaps.append(d);
    }
    py::dict diag;
    diag["steps"] = tr.diag.steps;
    diag["dt_min"] = tr.diag.dt_min;
    diag["dt_max"] = tr.diag.dt_max;
    diag["max_mass_drift"] = tr.diag.max_mass_drift;
    diag["min_rho_before_clamp"] = tr.diag.min_rho_before_clamp;
    diag["max_eps_hdot"] = tr.diag.max_eps_hdot;
    diag["energy_violation"] = tr.diag.energy_violation;
    diag["energy_tolerance"] = tr.diag.energy_tolerance;
    diag["energy_ok"] = tr.diag.energy_ok();
    py::dict out;
    out["energy"] = energy;
    out["snapshots"] = snaps;
    out["diagnostics"] = diag;
    return out;
}

} // namespace

PYBIND11_MODULE(_lmfsi, m) {
    m.doc() = "Low-Mach compressible flow around a small moving body";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<InvalidStateError>(m, "InvalidStateError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init(&GridSpec::square), py::arg("n"), py::arg("side_length") = 1.0)
        .def_readwrite("nx", &GridSpec::nx)
        .def_readwrite("ny", &GridSpec::ny)
        .def_readwrite("side_length", &GridSpec::side_length)
        .def_property_readonly("h", &GridSpec::h);

    py::class_<FluidParams>(m, "FluidParams")
        .def(py::init<>())
        .def_readwrite("a", &FluidParams::a)
        .def_readwrite("gamma", &FluidParams::gamma)
        .def_readwrite("mu", &FluidParams::mu)
        .def_readwrite("lambda_", &FluidParams::lambda)
        .def_readwrite("rho_bar", &FluidParams::rho_bar)
        .def_readwrite("eps", &FluidParams::eps)
        .def_readwrite("m", &FluidParams::m)
        .def("validate", &FluidParams::validate)
        .def("theorem_regime", &FluidParams::theorem_regime)
        .def("pressure_scale", &FluidParams::pressure_scale);

    py::enum_<BodyMode>(m, "BodyMode").value("prescribed", BodyMode::prescribed).value("coupled", BodyMode::coupled);
    py::enum_<PathKind>(m, "PathKind")
        .value("circle", PathKind::circle)
        .value("grazing", PathKind::grazing)
        .value("custom", PathKind::custom);

    py::class_<SolverConfig>(m, "SolverConfig")
        .def(py::init(&default_solver_config))
        .def_readwrite("params", &SolverConfig::params)
        .def_readwrite("grid", &SolverConfig::grid)
        .def_readwrite("dt_safety", &SolverConfig::dt_safety)
        .def_readwrite("penalization_eta", &SolverConfig::penalization_eta)
        .def_readwrite("t_end", &SolverConfig::t_end)
        .def_readwrite("body_mode", &SolverConfig::body_mode)
        .def_readwrite("body_density_exponent", &SolverConfig::body_density_exponent)
        .def_readwrite("stream_amplitude", &SolverConfig::stream_amplitude)
        .def_readwrite("snapshots", &SolverConfig::snapshots)
        .def_readwrite("density_perturbation", &SolverConfig::density_perturbation)
        .def_readwrite("seed", &SolverConfig::seed)
        .def("validate", &SolverConfig::validate);

    py::class_<SweepConfig>(m, "SweepConfig")
        .def(py::init(&default_sweep_config))
        .def_readwrite("base", &SweepConfig::base)
        .def_readwrite("eps_ladder", &SweepConfig::eps_ladder)
        .def_readwrite("min_cells", &SweepConfig::min_cells)
        .def_readwrite("cells_per_unit", &SweepConfig::cells_per_unit)
        .def_readwrite("max_cells", &SweepConfig::max_cells)
        .def_readwrite("fixed_cells", &SweepConfig::fixed_cells)
        .def_readwrite("path_kind", &SweepConfig::path_kind)
        .def_readwrite("jobs", &SweepConfig::jobs)
        .def("validate", &SweepConfig::validate)
        .def("grid_cells", &SweepConfig::grid_cells)
        .def("rung", &SweepConfig::rung);

    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));
    m.def("to_ini", &to_ini, py::arg("config"));

    m.def("pressure", &pressure, py::arg("rho"), py::arg("params"));
    m.def("relative_energy", &relative_energy, py::arg("rho"), py::arg("params"));
    m.def("sound_speed", &sound_speed, py::arg("rho"), py::arg("params"));

    m.def(
        "run",
        [](const SolverConfig& c, bool fields) {
            Trajectory tr;
            {
                py::gil_scoped_release release;
                RunOptions opt;
                opt.keep_fields = fields;
                tr = run(c, opt);
            }
            return trajectory_dict(tr, fields);
        },
        py::arg("config"), py::arg("fields") = false, "Integrate the penalized compressible system.");

    m.def(
        "run_reference",
        [](const SolverConfig& c) {
            IncTrajectory ref;
            {
                py::gil_scoped_release release;
                ref = run_reference(c);
            }
            py::list snaps;
            for (const IncSnapshot& s : ref.snapshots) {
                py::dict d;
                d["t"] = s.t;
                d["kinetic"] = s.kinetic;
                d["max_divergence"] = s.max_divergence;
                d["u"] = to_numpy(s.u);
                snaps.append(d);
            }
            py::dict out;
            out["snapshots"] = snaps;
            out["steps"] = ref.steps;
            return out;
        },
        py::arg("config"), "Incompressible reference from the same initial data.");

    m.def(
        "run_sweep",
        [](const SweepConfig& c) {
            std::vector<RungReport> reps;
            {
                py::gil_scoped_release release;
                reps = run_sweep(c);
            }
            py::list rows;
            for (const RungReport& r : reps) {
                py::dict d = row_dict(r.row);
                d["ok"] = r.ok;
                d["failure"] = r.failure;
                d["cells"] = r.cells;
                d["steps"] = r.steps;
                d["seconds"] = r.seconds;
                rows.append(d);
            }
            return rows;
        },
        py::arg("config"), "Run the eps ladder; one dict per rung.");

    m.def(
        "sweep_csv",
        [](const SweepConfig& c) {
            std::vector<RungReport> reps;
            {
                py::gil_scoped_release release;
                reps = run_sweep(c);
            }
            return sweep_csv(rows_of(reps));
        },
        py::arg("config"));
    m.def(
        "parse_sweep_csv",
        [](const std::string& text) {
            py::list rows;
            for (const SweepRow& r : parse_sweep_csv(text)) rows.append(row_dict(r));
            return rows;
        },
        py::arg("text"));
    m.def("config_hash", &config_hash, py::arg("canonical_text"));

    m.def("alpha_of_eps", &alpha_of_eps, py::arg("eps"));
    m.def(
        "cutoff_eta",
        [](double x, double y, double eps, double alpha, double smoothing) {
            return cutoff_eta(Vec2{x, y}, eps, alpha, smoothing);
        },
        py::arg("x"), py::arg("y"), py::arg("eps"), py::arg("alpha"), py::arg("smoothing") = 0.05);
    m.def(
        "w12_gap",
        [](double eps, int n, double t) {
            const PrescribedPath path = weak_test_config(eps, n, 1).path;
            return w12_gap(t, GridSpec::square(n), TestFunctionSpec::standard(), eps, path_of(path));
        },
        py::arg("eps"), py::arg("n"), py::arg("t") = 0.0,
        "W^{1,2} distance between the admissible and the plain test field along the verifier path.");
    m.def(
        "verify",
        [](double eps, int n, int snapshots) {
            const SolverConfig c = weak_test_config(eps, n, snapshots);
            VerifierRow v;
            {
                py::gil_scoped_release release;
                v = verify_trajectory(run(c), TestFunctionSpec::standard());
            }
            py::dict d;
            d["eps"] = v.eps;
            d["W12_gap"] = v.W12_gap;
            d["grad_eta_max"] = v.grad_eta_max;
            d["hess_eta_max"] = v.hess_eta_max;
            d["weak_residual"] = v.weak_residual;
            d["res_convective"] = v.res_convective;
            d["res_timederiv"] = v.res_timederiv;
            return d;
        },
        py::arg("eps"), py::arg("n"), py::arg("snapshots") = 20, "Run the verifier setup and evaluate it.");
}
