#include "ovfl/scenario.hpp"

#include "ovfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace ovfl {

using nlohmann::json;

namespace {

constexpr std::array kOutputs{OutputKind::Timeseries, OutputKind::Events, OutputKind::Monitors, OutputKind::Barrier,
                              OutputKind::Energy};

OutputKind output_from_string(const std::string& name) {
    for (auto k : kOutputs) {
        if (to_string(k) == name) return k;
    }
    throw ParseError("unknown output '" + name + "' (expected timeseries, events, monitors, barrier or energy)");
}

void reject_unknown(const json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ParseError(std::string(where) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError("unknown key '" + key + "' in " + std::string(where));
        }
    }
}

template <class T>
void read(const json& j, const char* key, T& out, std::string_view where) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ParseError(std::string(where) + "." + key + " has the wrong type");
    }
}

// Horizons are our choice. fig8 uses our own near-collision data: weak
// follow-the-leader gain and the second follower closing at nearly the
// largest admissible rate.
constexpr const char* kPresets[][2] = {
    {"fig5", R"({
        "params": {"alpha": 2.0, "beta": 1.0, "vbar": 0.8, "n_vehicles": 2},
        "coordinate_system": "relative",
        "initial": [[0.5, -0.7]],
        "t_end": 200.0
    })"},
    {"fig6-converge", R"({
        "params": {"alpha": 3.0, "beta": 2.0, "vbar": 1.3, "n_vehicles": 2},
        "coordinate_system": "relative",
        "initial": [[0.5, 1.0]],
        "t_end": 60.0
    })"},
    {"fig6-oscillate", R"({
        "params": {"alpha": 1.0, "beta": 1.0, "vbar": 1.3, "n_vehicles": 2},
        "coordinate_system": "relative",
        "initial": [[0.5, 1.0]],
        "t_end": 60.0
    })"},
    {"fig8", R"({
        "params": {"alpha": 1.0, "beta": 0.25, "vbar": 0.8, "n_vehicles": 3},
        "coordinate_system": "difference",
        "initial": [[1.5, 0.3], [0.8, -1.4]],
        "t_end": 60.0
    })"},
};

} // namespace

std::string_view to_string(OutputKind kind) {
    switch (kind) {
    case OutputKind::Timeseries: return "timeseries";
    case OutputKind::Events: return "events";
    case OutputKind::Monitors: return "monitors";
    case OutputKind::Barrier: return "barrier";
    case OutputKind::Energy: return "energy";
    }
    return "unknown";
}

bool Scenario::wants(OutputKind kind) const { return std::find(outputs.begin(), outputs.end(), kind) != outputs.end(); }

Scenario scenario_from_json(const json& j) {
    reject_unknown(j, "scenario",
                   {"name", "params", "coordinate_system", "initial", "t_end", "integrator", "epsilon", "seed",
                    "outputs", "dense_points"});
    Scenario s;
    read(j, "name", s.name, "scenario");

    bool n_given = false;
    if (auto it = j.find("params"); it != j.end()) {
        reject_unknown(*it, "params", {"alpha", "beta", "vbar", "n_vehicles"});
        read(*it, "alpha", s.params.alpha, "params");
        read(*it, "beta", s.params.beta, "params");
        read(*it, "vbar", s.params.vbar, "params");
        n_given = it->contains("n_vehicles");
        read(*it, "n_vehicles", s.params.n_vehicles, "params");
    }
    if (auto it = j.find("coordinate_system"); it != j.end()) {
        std::string name;
        read(j, "coordinate_system", name, "scenario");
        try {
            s.coordinate_system = coordinate_system_from_string(name);
        } catch (const Error& e) {
            throw ParseError(e.what());
        }
    }
    if (auto it = j.find("initial"); it != j.end()) {
        if (!it->is_array()) throw ParseError("scenario.initial must be an array of [position, velocity] pairs");
        for (const auto& pair : *it) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
                throw ParseError("scenario.initial entries must be [position, velocity] number pairs");
            }
            s.initial.push_back({pair[0].get<double>(), pair[1].get<double>()});
        }
    }
    if (!n_given && !s.initial.empty()) {
        const int pairs = static_cast<int>(s.initial.size());
        s.params.n_vehicles = s.coordinate_system == CoordinateSystem::Absolute ? pairs : pairs + 1;
    }
    read(j, "t_end", s.integrator.t_end, "scenario");
    if (auto it = j.find("integrator"); it != j.end()) {
        reject_unknown(*it, "integrator",
                       {"rtol", "atol", "max_step", "singular_guard", "step_cap_coefficient", "fixed_step",
                        "max_steps"});
        read(*it, "rtol", s.integrator.rtol, "integrator");
        read(*it, "atol", s.integrator.atol, "integrator");
        read(*it, "max_step", s.integrator.max_step, "integrator");
        read(*it, "singular_guard", s.integrator.singular_guard, "integrator");
        read(*it, "step_cap_coefficient", s.integrator.step_cap_coefficient, "integrator");
        read(*it, "fixed_step", s.integrator.fixed_step, "integrator");
        read(*it, "max_steps", s.integrator.max_steps, "integrator");
    }
    read(j, "epsilon", s.epsilon, "scenario");
    read(j, "seed", s.seed, "scenario");
    if (auto it = j.find("outputs"); it != j.end()) {
        std::vector<std::string> names;
        read(j, "outputs", names, "scenario");
        s.outputs.clear();
        for (const auto& n : names) {
            const auto k = output_from_string(n);
            if (!s.wants(k)) s.outputs.push_back(k);
        }
    }
    read(j, "dense_points", s.dense_points, "scenario");
    return s;
}

Scenario parse_scenario(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed scenario JSON: ") + e.what(), e.byte);
    }
    return scenario_from_json(j);
}

json to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["params"] = {{"alpha", s.params.alpha},
                   {"beta", s.params.beta},
                   {"vbar", s.params.vbar},
                   {"n_vehicles", s.params.n_vehicles}};
    j["coordinate_system"] = std::string(to_string(s.coordinate_system));
    j["initial"] = json::array();
    for (const auto& pair : s.initial) j["initial"].push_back({pair[0], pair[1]});
    j["t_end"] = s.integrator.t_end;
    j["integrator"] = {{"rtol", s.integrator.rtol},
                       {"atol", s.integrator.atol},
                       {"max_step", s.integrator.max_step},
                       {"singular_guard", s.integrator.singular_guard},
                       {"step_cap_coefficient", s.integrator.step_cap_coefficient},
                       {"fixed_step", s.integrator.fixed_step},
                       {"max_steps", s.integrator.max_steps}};
    j["epsilon"] = s.epsilon;
    j["seed"] = s.seed;
    j["outputs"] = json::array();
    for (auto k : s.outputs) j["outputs"].push_back(std::string(to_string(k)));
    j["dense_points"] = s.dense_points;
    return j;
}

void validate_scenario(const Scenario& s) {
    s.params.validate();
    s.integrator.validate();
    if (!(s.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    if (s.dense_points < 0) throw ValidationError("dense_points must be nonnegative");
    const std::size_t expected = static_cast<std::size_t>(
        s.coordinate_system == CoordinateSystem::Absolute ? s.params.n_vehicles : s.params.followers());
    if (s.initial.size() != expected) {
        throw ValidationError("initial must hold " + std::to_string(expected) + " pairs for n_vehicles = " +
                              std::to_string(s.params.n_vehicles) + " in " +
                              std::string(to_string(s.coordinate_system)) + " coordinates, got " +
                              std::to_string(s.initial.size()));
    }
    for (const auto& pair : s.initial) {
        if (!std::isfinite(pair[0]) || !std::isfinite(pair[1])) throw ValidationError("initial data must be finite");
    }
    switch (s.coordinate_system) {
    case CoordinateSystem::Absolute: {
        if (s.initial[0][1] != s.params.vbar) {
            throw ValidationError("leader velocity y_0 must equal vbar");
        }
        PlatoonState ps;
        for (const auto& pair : s.initial) {
            ps.x.push_back(pair[0]);
            ps.y.push_back(pair[1]);
        }
        validate_relative(to_relative(ps, s.params.vbar), s.params.vbar);
        break;
    }
    case CoordinateSystem::Relative: {
        RelativeState rs;
        for (const auto& pair : s.initial) {
            rs.X.push_back(pair[0]);
            rs.Y.push_back(pair[1]);
        }
        validate_relative(rs, s.params.vbar);
        break;
    }
    case CoordinateSystem::Difference: {
        DifferenceState ds;
        for (std::size_t n = 0; n < s.initial.size(); ++n) {
            if (!(s.initial[n][0] > 0.0)) {
                std::ostringstream os;
                os.precision(17);
                os << "gap xi_" << n + 1 << " = " << s.initial[n][0] << " must be positive";
                throw ValidationError(os.str());
            }
            ds.xi.push_back(s.initial[n][0]);
            ds.zeta.push_back(s.initial[n][1]);
        }
        validate_relative(from_difference(ds), s.params.vbar);
        break;
    }
    }
}

std::vector<double> initial_state(const Scenario& s) {
    std::vector<double> out(2 * s.initial.size());
    for (std::size_t n = 0; n < s.initial.size(); ++n) {
        out[n] = s.initial[n][0];
        out[s.initial.size() + n] = s.initial[n][1];
    }
    return out;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& p : kPresets) out.emplace_back(p[0]);
    return out;
}

std::optional<Scenario> preset(std::string_view name) {
    for (const auto& p : kPresets) {
        if (name == p[0]) {
            Scenario s = parse_scenario(p[1]);
            s.name = p[0];
            return s;
        }
    }
    return std::nullopt;
}

Scenario load_scenario(const std::string& file_or_preset) {
    namespace fs = std::filesystem;
    if (!fs::exists(file_or_preset)) {
        if (auto s = preset(file_or_preset)) return *s;
        throw ValidationError("no scenario file or preset named '" + file_or_preset + "'");
    }
    std::ifstream in(file_or_preset, std::ios::binary);
    if (!in) throw ValidationError("cannot read scenario file '" + file_or_preset + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

} // namespace ovfl
