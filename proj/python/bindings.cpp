#include "ovfl/commands.hpp"
#include "ovfl/energy.hpp"
#include "ovfl/errors.hpp"
#include "ovfl/model.hpp"
#include "ovfl/report_io.hpp"
#include "ovfl/scenario.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;

namespace {

ovfl::ModelParams params(double alpha, double beta, double vbar, int n_vehicles) {
    ovfl::ModelParams p{alpha, beta, vbar, n_vehicles};
    p.validate();
    return p;
}

ovfl::Scenario scenario_from(const std::string& text_or_preset) {
    if (auto s = ovfl::preset(text_or_preset)) return *s;
    return ovfl::parse_scenario(text_or_preset);
}

std::vector<double> vector_field(const std::string& system, std::vector<double> state, double alpha, double beta,
                                 double vbar) {
    const auto sys = ovfl::coordinate_system_from_string(system);
    const int followers = ovfl::followers_in(sys, state.size());
    const auto p = params(alpha, beta, vbar, followers + 1);
    std::vector<double> out(state.size());
    switch (sys) {
    case ovfl::CoordinateSystem::Absolute: ovfl::absolute_rhs(p, state, out); break;
    case ovfl::CoordinateSystem::Relative: ovfl::relative_rhs(p, state, out); break;
    case ovfl::CoordinateSystem::Difference: ovfl::difference_rhs(p, state, out); break;
    }
    return out;
}

// Returns the run as JSON text: run artifact fields plus the sample table columns.
std::string simulate(const std::string& scenario) {
    const auto run = ovfl::run_scenario(scenario_from(scenario));
    nlohmann::json j;
    j["scenario"] = ovfl::to_json(run.scenario);
    j["events"] = ovfl::to_json(run.events);
    j["monitors"] = ovfl::to_json(run.analysis.monitors);
    j["budget"] = ovfl::to_json(run.analysis.budget);
    j["convergence"] = ovfl::to_json(run.analysis.convergence);
    j["barrier"] = run.analysis.barrier ? ovfl::to_json(*run.analysis.barrier) : nlohmann::json(nullptr);
    std::ostringstream csv;
    ovfl::write_csv(csv, run.table);
    j["csv"] = csv.str();
    return j.dump();
}

std::string analyze(const std::string& csv_text, const std::string& scenario) {
    std::istringstream in(csv_text);
    const auto table = ovfl::read_csv(in);
    const auto s = scenario_from(scenario);
    ovfl::validate_scenario(s);
    return ovfl::to_json(ovfl::analyze_table(table, s).monitors).dump();
}

std::string sweep(const std::string& scenario, std::vector<double> alpha, std::vector<double> beta,
                  std::size_t samples, std::uint64_t seed, const std::string& out) {
    ovfl::SweepOptions opt;
    opt.alpha = std::move(alpha);
    opt.beta = std::move(beta);
    opt.samples = samples;
    opt.seed = seed;
    opt.out = out;
    return ovfl::run_sweep(scenario_from(scenario), opt).dump();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "OVFL platoon model: vector fields, energy, simulation and analysis";

    auto base = py::register_exception<ovfl::Error>(m, "OvflError");
    py::register_exception<ovfl::ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ovfl::DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ovfl::ParseError>(m, "ParseError", base.ptr());

    m.def("ov_value", &ovfl::ov_value, py::arg("x"));
    m.def("ov_slope", &ovfl::ov_slope, py::arg("x"));
    m.def("ov_inverse", &ovfl::ov_inverse, py::arg("v"));
    m.def(
        "x_infinity", [](double vbar) { return ovfl::ov_inverse(vbar); }, py::arg("vbar"));

    m.def(
        "potential", [](double x, double alpha, double vbar) { return ovfl::potential(params(alpha, 1.0, vbar, 2), x); },
        py::arg("x"), py::arg("alpha"), py::arg("vbar"));
    m.def(
        "hamiltonian",
        [](double x, double y, double alpha, double vbar) {
            return ovfl::hamiltonian(params(alpha, 1.0, vbar, 2), x, y);
        },
        py::arg("x"), py::arg("y"), py::arg("alpha"), py::arg("vbar"));
    m.def(
        "dH_dt",
        [](double x, double y, double alpha, double beta, double vbar) {
            return ovfl::dH_dt(params(alpha, beta, vbar, 2), x, y);
        },
        py::arg("x"), py::arg("y"), py::arg("alpha"), py::arg("beta"), py::arg("vbar"));
    m.def(
        "energy_budget",
        [](double x1, double y1, double alpha, double beta, double vbar) {
            return ovfl::to_json(ovfl::energy_budget(params(alpha, beta, vbar, 2), x1, y1)).dump();
        },
        py::arg("x1"), py::arg("y1"), py::arg("alpha"), py::arg("beta"), py::arg("vbar"));

    m.def("vector_field", &vector_field, py::arg("system"), py::arg("state"), py::arg("alpha"), py::arg("beta"),
          py::arg("vbar"));
    m.def("presets", &ovfl::preset_names);
    m.def("simulate", &simulate, py::arg("scenario"), py::call_guard<py::gil_scoped_release>());
    m.def("analyze", &analyze, py::arg("csv"), py::arg("scenario"), py::call_guard<py::gil_scoped_release>());
    m.def("sweep", &sweep, py::arg("scenario"), py::arg("alpha"), py::arg("beta"), py::arg("samples"),
          py::arg("seed"), py::arg("out"), py::call_guard<py::gil_scoped_release>());
    m.attr("__version__") = std::string(ovfl::version());
}
