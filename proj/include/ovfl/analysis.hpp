#pragma once

#include "ovfl/energy.hpp"
#include "ovfl/integrator.hpp"
#include "ovfl/model.hpp"
#include "ovfl/samples.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ovfl {

// Quadrants of the (X_1, Y_1) plane around the rest point (X_inf, 0).
enum class RegionLabel { U1, L1, U2, L2, AxisX, AxisY, Equilibrium };

std::string_view to_string(RegionLabel label);

RegionLabel classify_region(double x, double y, double x_infinity);

// Outcome of one numerical check. passed <=> worst_violation <= tolerance.
struct MonitorReport {
    std::string name;
    bool passed = true;
    double worst_violation = 0.0;
    double tolerance = 0.0;
    double time = 0.0;             // where the worst violation occurred
    std::vector<double> state;     // [X..., Y...] at that time
    std::map<std::string, double> details;
};

// Invariance / sign-change behaviour of Y_1 on [0, T_inf) according to the
// starting quadrant. Requires an N = 1 table (use SampleTable::first_pair()).
std::vector<MonitorReport> verify_region_lemmas(const SampleTable& table, const ModelParams& p);

// Energy dissipation and the bounds it implies for the first pair:
// monotone H, |Y_1| <= y_bar, X_1 <= x_bar, X_1 bounded away from zero.
std::vector<MonitorReport> verify_energy_and_bounds(const SampleTable& table, const ModelParams& p,
                                                    const EnergyBudget& budget);

// Every Y_n stays in (vbar - V(inf), vbar] up to `tol`.
MonitorReport verify_speed_limits(const SampleTable& table, const ModelParams& p, double tol = 1e-8);

// Every gap stays above the singular guard.
MonitorReport verify_min_gap(const SampleTable& table, double guard = 1e-9);

struct ConvergenceReport {
    double epsilon = 0.0;
    bool entered_ball = false;
    std::optional<double> entry_time;
    std::optional<double> fitted_rate;    // least-squares slope of -log H after entry
    std::optional<double> envelope_rate;  // largest r with H(t) <= H(entry) exp(-r (t - entry))
    double gronwall_rate = 0.0;
    int y1_sign_changes = 0;
    std::size_t samples_after_entry = 0;
};

// Ball entry ||(X_1 - X_inf, Y_1)|| < epsilon and decay of H afterwards.
// Throws InsufficientDataError when fewer than 10 rows follow the entry.
ConvergenceReport convergence_diagnostics(const SampleTable& table, const ModelParams& p, const EnergyBudget& budget,
                                          double epsilon);

// Sign changes of Y_1, ignoring rows with |Y_1| <= floor.
int count_y1_sign_changes(const SampleTable& table, double floor = 1e-10);

// Event specifications in the given coordinates.
EventSpec t_infinity_event(CoordinateSystem system, const ModelParams& p);
EventSpec t_infinity_eps_event(CoordinateSystem system, const ModelParams& p, double epsilon);
EventSpec y_sign_change_event(CoordinateSystem system);
EventSpec t_check_event(CoordinateSystem system, double half_delta_2);
EventSpec energy_violation_event(CoordinateSystem system, const ModelParams& p, double slack = 1e-7);

} // namespace ovfl
