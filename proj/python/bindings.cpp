#include "chemowave/scenario.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace chemowave;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v)
{
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Scenario scenario_with(const std::filesystem::path& path, const std::map<std::string, std::string>& overrides)
{
    Config cfg = path.empty() ? Config::parse("") : Config::load(path);
    for (const auto& [k, v] : overrides) {
        cfg.set(k, v);
    }
    return scenario_from_config(cfg);
}

py::dict decay_dict(const DecayReport& rep)
{
    py::dict out;
    for (const auto& r : rep.rows) {
        py::dict row;
        row["predicted"] = r.predicted;
        row["fitted"] = r.fitted;
        row["r2"] = r.r2;
        row["t_min"] = r.t_min;
        row["t_max"] = r.t_max;
        row["pass"] = r.pass();
        out[py::str(r.series)] = row;
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "damped chemotaxis on the half-line: profiles, corrections, solver, diagnostics";

    py::class_<PressureLaw>(m, "PressureLaw")
        .def(py::init<>())
        .def(py::init([](double K, double gamma) { return PressureLaw{K, gamma}; }), py::arg("K"), py::arg("gamma"))
        .def_readwrite("K", &PressureLaw::K)
        .def_readwrite("gamma", &PressureLaw::gamma);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("alpha", &ModelParams::alpha)
        .def_readwrite("mu", &ModelParams::mu)
        .def_readwrite("D", &ModelParams::D)
        .def_readwrite("a", &ModelParams::a)
        .def_readwrite("b", &ModelParams::b)
        .def_readwrite("pressure", &ModelParams::pressure)
        .def_readwrite("rho_plus", &ModelParams::rho_plus)
        .def_readwrite("m_plus", &ModelParams::m_plus)
        .def_readwrite("phi_plus", &ModelParams::phi_plus)
        .def_property_readonly("d_plus", &ModelParams::d_plus)
        .def("validate", &ModelParams::validate);

    m.def("q_prime", &q_potential_d1, py::arg("params"), py::arg("rho"));
    m.def(
        "validate_params",
        [](const ModelParams& p, double lo, double hi) {
            const auto v = validate_params(p, lo, hi);
            py::dict d;
            d["valid"] = v.valid;
            d["near_degenerate"] = v.near_degenerate;
            d["min_margin"] = v.min_margin;
            d["argmin_rho"] = v.argmin_rho;
            return d;
        },
        py::arg("params"), py::arg("rho_min"), py::arg("rho_max"));

    m.def(
        "selfsimilar_profile",
        [](const ModelParams& p, double rho_left, double xi_max) {
            const auto s = build_selfsimilar_wave(p, rho_left, xi_max);
            return py::make_tuple(to_array(s.xi_grid()), to_array(s.table.values()));
        },
        py::arg("params"), py::arg("rho_left"), py::arg("xi_max") = 0.0,
        "Similarity profile (xi, rho_bar(xi)) for the Dirichlet wave.");

    py::class_<CorrectionField>(m, "CorrectionField")
        .def_readonly("epsilon0", &CorrectionField::epsilon0)
        .def_readonly("m0_at_0", &CorrectionField::m0_at_0)
        .def_property_readonly("case", [](const CorrectionField& c) { return c.kind == CorrectionCase::A ? "A" : "B"; });
    m.def("correction_a", &make_correction_A, py::arg("params"), py::arg("epsilon0") = 0.1);
    m.def("correction_b", &make_correction_B, py::arg("params"), py::arg("epsilon0"), py::arg("m0_at_0"));
    m.def(
        "eval_correction",
        [](const CorrectionField& c, Array xs, double t) {
            const auto n = xs.size();
            Array r(n), mm(n), ph(n);
            const double* x = xs.data();
            for (py::ssize_t i = 0; i < n; ++i) {
                const auto v = eval_correction(c, x[i], t);
                r.mutable_data()[i] = v.rho;
                mm.mutable_data()[i] = v.m;
                ph.mutable_data()[i] = v.phi;
            }
            return py::make_tuple(r, mm, ph);
        },
        py::arg("correction"), py::arg("x"), py::arg("t"));

    m.def(
        "fit_decay",
        [](Array t, Array v, double t_min, double t_max) {
            const auto f = fit_decay({t.data(), static_cast<std::size_t>(t.size())},
                                     {v.data(), static_cast<std::size_t>(v.size())}, t_min, t_max);
            py::dict d;
            d["slope"] = f.slope;
            d["intercept"] = f.intercept;
            d["r2"] = f.r_squared;
            d["n"] = f.n;
            d["super_algebraic"] = f.super_algebraic;
            return d;
        },
        py::arg("t"), py::arg("values"), py::arg("t_min"), py::arg("t_max"));

    m.def(
        "run",
        [](const std::filesystem::path& config, const std::map<std::string, std::string>& overrides) {
            RunOutcome out;
            {
                py::gil_scoped_release nogil;
                out = run_scenario(scenario_with(config, overrides));
            }
            py::dict d;
            d["exit_code"] = out.exit_code;
            d["message"] = out.message;
            d["artifacts"] = out.artifacts;
            return d;
        },
        py::arg("config") = std::filesystem::path(), py::arg("overrides") = std::map<std::string, std::string>{},
        "Run a scenario and write its artifacts; returns the exit code and paths.");

    m.def(
        "simulate",
        [](const std::filesystem::path& config, const std::map<std::string, std::string>& overrides) {
            ScenarioResult res;
            {
                py::gil_scoped_release nogil;
                res = execute(scenario_with(config, overrides));
            }
            py::dict d;
            const auto& snaps = res.trajectory.snapshots;
            std::vector<double> ts;
            py::list rho;
            for (const auto& s : snaps) {
                ts.push_back(s.t);
                rho.append(to_array(s.rho));
            }
            d["t"] = to_array(ts);
            d["rho"] = rho;
            d["decay"] = decay_dict(res.report);
            py::dict growth;
            for (const auto& q : res.monitor.quantities) {
                growth[py::str(q.name)] = q.growth;
            }
            d["monitor_growth"] = growth;
            d["monitor_grew"] = res.monitor.grew;
            d["delta0"] = res.prepared.delta0;
            d["steps"] = res.trajectory.stats.steps;
            return d;
        },
        py::arg("config") = std::filesystem::path(), py::arg("overrides") = std::map<std::string, std::string>{},
        "Run a scenario in memory: snapshots, decay fits and monitor growth.");

    m.attr("__version__") = version_string();
}
