// Copyright 2026 The hotgate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hotgate/analysis.hpp"
#include "hotgate/cli.hpp"

namespace py = pybind11;
using namespace hotgate;

namespace {

py::dict condition_dict(const ConditionReport &r) {
    py::dict d;
    d["eta"] = r.eta;
    d["n_bar_c"] = r.n_bar_c;
    d["n_bar_r"] = r.n_bar_r;
    d["cycles"] = r.cycles;
    d["D"] = r.D;
    d["delta"] = r.delta;
    d["W"] = r.W;
    d["center"] = r.center;
    d["omega0"] = r.omega0;
    d["duration"] = r.duration;
    d["pulse_area"] = r.pulse_area;
    d["W_over_D"] = r.W_over_D;
    d["D_over_delta"] = r.D_over_delta;
    d["angle_spread"] = r.angle_spread;
    d["eta_bound"] = r.eta_bound;
    d["eta_bound_ratio"] = r.eta_bound_ratio;
    d["separation_hierarchy"] = r.separation_hierarchy;
    d["rabi_matching"] = r.rabi_matching;
    d["uniform_illumination"] = r.uniform_illumination;
    d["many_cycles"] = r.many_cycles;
    d["eta_condition"] = r.eta_condition;
    d["all_satisfied"] = r.all_satisfied();
    return d;
}

// (exit code, stdout, stderr)
py::tuple cli_main(const std::vector<std::string> &args) {
    std::vector<const char *> argv{"hotgate"};
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    int code;
    {
        py::gil_scoped_release release;
        code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_hotgate, m) {
    m.doc() = "Two-ion wavepacket gate simulator";
    py::register_exception<Error>(m, "HotgateError", PyExc_RuntimeError);

    py::class_<TrapSpec>(m, "TrapSpec")
        .def(py::init<>())
        .def_readwrite("exponent", &TrapSpec::exponent)
        .def_readwrite("stiffness", &TrapSpec::stiffness)
        .def_readwrite("coulomb", &TrapSpec::coulomb)
        .def_readwrite("mass", &TrapSpec::mass)
        .def_readwrite("lamb_dicke", &TrapSpec::lamb_dicke)
        .def("validate", &TrapSpec::validate);

    m.def("natural_coulomb_constant", &natural_coulomb_constant, py::arg("mass_amu"),
          py::arg("nu_c_hz"));
    m.def("natural_trap", &natural_trap, py::arg("exponent"), py::arg("coulomb"),
          py::arg("lamb_dicke"));
    m.def("equilibrium_separation", &equilibrium_separation);
    m.def("mode_frequencies", [](const TrapSpec &s) {
        const ModeFrequencies f = mode_frequencies(s);
        return py::make_tuple(f.nu_c, f.nu_r);
    });
    m.def("frequency_ratio", &frequency_ratio, py::arg("exponent"));
    m.def("solve_exponent_for_ratio", &solve_exponent_for_ratio, py::arg("target_ratio"));
    m.def("default_dims", &default_dims, py::arg("spec"), py::arg("n_bar_c"), py::arg("n_bar_r"));
    m.def("relative_mode_occupation", &relative_mode_occupation, py::arg("n_bar_c"));
    m.def("pulse_train", [](double eta_single, int n_pulses) {
        const PulseTrain p = pulse_train(eta_single, n_pulses);
        return py::make_tuple(p.eta_effective, p.net_flip);
    }, py::arg("eta_single"), py::arg("n_pulses"));

    py::class_<ModeBasis>(m, "ModeBasis")
        .def_readonly("spec", &ModeBasis::spec)
        .def_readonly("x_e", &ModeBasis::x_e)
        .def_readonly("nu_c", &ModeBasis::nu_c)
        .def_readonly("nu_r", &ModeBasis::nu_r)
        .def_readonly("m_c", &ModeBasis::m_c)
        .def_readonly("m_r", &ModeBasis::m_r)
        .def_readonly("x0", &ModeBasis::x0)
        .def_readonly("k", &ModeBasis::k)
        .def_readonly("width_c", &ModeBasis::width_c)
        .def_readonly("width_r", &ModeBasis::width_r)
        .def_readonly("eta_c", &ModeBasis::eta_c)
        .def_readonly("eta_r", &ModeBasis::eta_r)
        .def_property_readonly("dim_c", [](const ModeBasis &b) { return b.dim_c.levels(); })
        .def_property_readonly("dim_r", [](const ModeBasis &b) { return b.dim_r.levels(); });
    m.def("make_mode_basis", [](const TrapSpec &s, int dim_c, int dim_r) {
        return make_mode_basis(s, FockDim(dim_c), FockDim(dim_r));
    }, py::arg("spec"), py::arg("dim_c"), py::arg("dim_r"));

    m.def("ideal_gate", &ideal_gate);
    m.def("free_propagator", &free_propagator, py::arg("basis"), py::arg("t"));

    m.def("separation_analytic", &separation_analytic, py::arg("basis"), py::arg("eta"),
          py::arg("t"));
    m.def("separation_curve", [](const ModeBasis &b, double eta, int samples, double n_bar_c,
                                 bool check_convergence, double tol) {
        SeparationCurve c;
        {
            py::gil_scoped_release release;
            c = separation_curve(b, eta, samples, n_bar_c, check_convergence, tol);
        }
        py::dict d;
        d["t"] = c.times;
        d["d_analytic"] = c.d_analytic;
        d["d_numeric"] = c.d_numeric;
        d["dim_c"] = c.dim_c;
        d["dim_r"] = c.dim_r;
        d["max_change"] = c.max_change;
        d["converged"] = c.converged;
        return d;
    }, py::arg("basis"), py::arg("eta"), py::arg("samples") = 64, py::arg("n_bar_c") = 0.0,
          py::arg("check_convergence") = true, py::arg("tol") = 1e-6);

    m.def("condition_solver", [](const ModeBasis &b, double n_bar_c, int cycles, double margin) {
        ConditionOptions options;
        options.margin = margin;
        return condition_dict(condition_solver(b, n_bar_c, cycles, options).report);
    }, py::arg("basis"), py::arg("n_bar_c"), py::arg("cycles"), py::arg("margin") = 3.0);

    m.def("anharmonic_coefficients", [](const TrapSpec &s, int order) {
        return anharmonic_expansion(s, order).coefficients;
    }, py::arg("spec"), py::arg("order") = 3);
    m.def("anharmonic_fidelity", [](const ModeBasis &b, int order, double n_bar_c, double scale,
                                    bool kicked, int quadrature_points, bool exact) {
        const auto e = order > 0 ? anharmonic_expansion(b.spec, order).scaled(scale)
                                 : AnharmonicExpansion{};
        const MotionalState motion = thermal_motion(b, n_bar_c);
        const ExpectationMode mode = kicked ? ExpectationMode::Kicked : ExpectationMode::Initial;
        py::gil_scoped_release release;
        if (exact) {
            return anharmonic_fidelity_exact(b, e, motion, mode);
        }
        AnharmonicOptions options;
        options.mode = mode;
        options.quadrature_points = quadrature_points;
        return anharmonic_fidelity(b, e, motion, options).f_cor;
    }, py::arg("basis"), py::arg("order") = 3, py::arg("n_bar_c") = 0.0, py::arg("scale") = 1.0,
          py::arg("kicked") = false, py::arg("quadrature_points") = 256, py::arg("exact") = false);

    py::class_<GateConfig>(m, "GateConfig")
        .def(py::init<>())
        .def_readwrite("exponent", &GateConfig::exponent)
        .def_readwrite("coulomb", &GateConfig::coulomb)
        .def_readwrite("eta", &GateConfig::eta)
        .def_readwrite("n_bar_c", &GateConfig::n_bar_c)
        .def_readwrite("cycles", &GateConfig::cycles)
        .def_readwrite("idealized_flip", &GateConfig::idealized_flip)
        .def_readwrite("omega0", &GateConfig::omega0)
        .def_readwrite("control_phase", &GateConfig::control_phase)
        .def_readwrite("dim_c", &GateConfig::dim_c)
        .def_readwrite("dim_r", &GateConfig::dim_r)
        .def_readwrite("weight_cutoff", &GateConfig::weight_cutoff)
        .def_readwrite("check_convergence", &GateConfig::check_convergence)
        .def_readwrite("convergence_tol", &GateConfig::convergence_tol)
        .def_readwrite("max_doublings", &GateConfig::max_doublings)
        .def_property(
            "anharmonic_order", [](const GateConfig &c) { return c.anharmonic.enabled ? c.anharmonic.order : 0; },
            [](GateConfig &c, int order) {
                c.anharmonic.order = order;
                c.anharmonic.enabled = order > 0;
            })
        .def("trap", &GateConfig::trap);

    py::class_<GateReport>(m, "GateReport")
        .def_readonly("eta", &GateReport::eta)
        .def_readonly("n_bar_c", &GateReport::n_bar_c)
        .def_readonly("fidelity", &GateReport::fidelity)
        .def_readonly("fidelity_vs_identity", &GateReport::fidelity_vs_identity)
        .def_readonly("purity", &GateReport::purity)
        .def_readonly("f_cor", &GateReport::f_cor)
        .def_readonly("dim_c", &GateReport::dim_c)
        .def_readonly("dim_r", &GateReport::dim_r)
        .def_readonly("converged", &GateReport::converged)
        .def_readonly("motional_restoration", &GateReport::motional_restoration)
        .def_readonly("warnings", &GateReport::warnings)
        .def_property_readonly("conditions", [](const GateReport &r) -> py::object {
            if (!r.conditions) {
                return py::none();
            }
            return condition_dict(*r.conditions);
        });

    m.def("evaluate_gate", &evaluate_gate, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("scan", [](const std::vector<std::pair<double, double>> &grid, const GateConfig &base,
                     int jobs) {
        std::vector<ScanRow> rows;
        {
            py::gil_scoped_release release;
            rows = scan(grid, base, jobs);
        }
        py::list out;
        for (const auto &row : rows) {
            py::dict d;
            d["eta"] = row.eta;
            d["n_bar_c"] = row.n_bar_c;
            d["report"] = row.report ? py::cast(*row.report) : py::none();
            d["error"] = row.error;
            out.append(d);
        }
        return out;
    }, py::arg("grid"), py::arg("config"), py::arg("jobs") = 1);

    m.def("cli_main", &cli_main, py::arg("args"));
}
