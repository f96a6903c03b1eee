#pragma once

#include "ovfl/integrator.hpp"
#include "ovfl/model.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ovfl {

enum class OutputKind { Timeseries, Events, Monitors, Barrier, Energy };

std::string_view to_string(OutputKind kind);

struct Scenario {
    std::string name;
    ModelParams params;
    CoordinateSystem coordinate_system = CoordinateSystem::Relative;
    // One (position-like, velocity-like) pair per vehicle: (x_n, y_n) for
    // n = 0..N in absolute coordinates, (X_n, Y_n) or (xi_n, zeta_n) for
    // n = 1..N otherwise.
    std::vector<std::array<double, 2>> initial;
    IntegratorConfig integrator;  // integrator.t_end is the scenario horizon
    double epsilon = 0.1;
    std::uint64_t seed = 0;
    std::vector<OutputKind> outputs{OutputKind::Timeseries, OutputKind::Events, OutputKind::Monitors,
                                    OutputKind::Barrier, OutputKind::Energy};
    int dense_points = 16;  // interior rows per accepted step in the time series

    bool wants(OutputKind kind) const;
};

// Throws ParseError for malformed JSON (with byte offset), unknown keys and
// wrong types; ValidationError is left to validate_scenario.
Scenario parse_scenario(std::string_view text);
Scenario scenario_from_json(const nlohmann::json& j);

// Fully resolved form, every default filled in.
nlohmann::json to_json(const Scenario& s);

// Throws ValidationError naming the first violated invariant.
void validate_scenario(const Scenario& s);

// Flat initial state for the scenario's coordinate system.
std::vector<double> initial_state(const Scenario& s);

std::vector<std::string> preset_names();
std::optional<Scenario> preset(std::string_view name);

// A preset name (when no such file exists) or a path to a scenario file.
Scenario load_scenario(const std::string& file_or_preset);

} // namespace ovfl
