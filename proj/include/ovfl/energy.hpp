#pragma once

#include "ovfl/model.hpp"

#include <cstddef>
#include <optional>
#include <string_view>

namespace ovfl {

// P(x) = alpha * integral_{X_inf}^{x} (V(s) - vbar) ds, evaluated in closed form.
// Throws DomainError for x <= 0.
double potential(const ModelParams& p, double x);

// P'(x) = alpha * (V(x) - vbar).
double potential_slope(const ModelParams& p, double x);

// Right limit of P at the collision boundary x = 0.
double potential_at_contact(const ModelParams& p);

// P in equilibrium-centred coordinates: potential_shifted(u) = P(u + X_inf).
double potential_shifted(const ModelParams& p, double u);

// H(x, y) = y^2 / 2 + P(x) for the first vehicle pair.
double hamiltonian(const ModelParams& p, double x, double y);

// Dissipation rate dH/dt = -(alpha + beta / x^2) y^2 along the flow.
double dH_dt(const ModelParams& p, double x, double y);

enum class Delta1Source { Energy, Empirical, Unavailable };

std::string_view to_string(Delta1Source source);

// Bounds and constants derived from the initial energy of the first pair.
struct EnergyBudget {
    double x_infinity = 0.0;
    double h_circ = 0.0;         // initial energy
    double y_bar = 0.0;          // sqrt(2 h_circ), bound on |Y_1|
    double x_bar = 0.0;          // P(x_bar) = h_circ on [X_inf, inf), bound on X_1
    double x_bar_literal = 0.0;  // the bound read literally as x_bar = h_circ
    std::optional<double> delta_1;  // lower bound on X_1
    Delta1Source delta_1_source = Delta1Source::Unavailable;
    double potential_at_contact = 0.0;
    double k_sc = 0.0;           // alpha * min V' over [delta_1, x_bar]
    double k_lower = 0.0;        // min{1/2, k_sc/2}
    double k_upper = 0.0;        // max{1/2, alpha}
    double k19 = 0.0;            // (alpha + beta / x_bar^2) / 2
    double gronwall_rate = 0.0;  // k19 / k_upper
};

// Budget for initial data (x1, y1) of the first pair. Throws ValidationError
// unless x1 > 0 and y1 respects the speed limits.
EnergyBudget energy_budget(const ModelParams& p, double x1, double y1);

// Replaces delta_1 by an observed trajectory minimum when no energy-based
// value exists, and recomputes the constants that depend on it.
EnergyBudget refine_delta1(const ModelParams& p, EnergyBudget budget, double observed_min_x1);

// Solves P(x) = level on (0, X_inf] (left) or [X_inf, inf) (right).
// Returns nullopt on the left branch when level >= P(0+).
std::optional<double> potential_inverse_left(const ModelParams& p, double level);
double potential_inverse_right(const ModelParams& p, double level);

struct SandwichCheck {
    double worst_lower = 0.0;  // max over the grid of k_lower |U|^2 - H, should be <= 0
    double worst_upper = 0.0;  // max over the grid of H - k_upper |U|^2, should be <= 0
    std::size_t points = 0;
};

// k_lower |U|^2 <= H(u, v) <= k_upper |U|^2 on an n x n grid over
// (delta_1 - X_inf, x_bar - X_inf) x [-y_bar, y_bar], U = (u, v). Needs delta_1.
SandwichCheck sandwich_grid_check(const ModelParams& p, const EnergyBudget& budget, int n = 100);

} // namespace ovfl
