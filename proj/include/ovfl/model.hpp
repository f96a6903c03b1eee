#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace ovfl {

// tanh(2); V(x) = tanh(x - 2) + tanh(2).
inline constexpr double kTanh2 = 0.96402758007581688395;

// Largest attainable speed, V(infinity) = 1 + tanh(2).
inline constexpr double kMaxSpeed = 1.0 + kTanh2;

// Optimal velocity curve V(x) = tanh(x - 2) - tanh(-2).
double ov_value(double x);

// V'(x) = sech^2(x - 2). Its maximum is 1 at x = 2.
double ov_slope(double x);

// Gap x with V(x) = v. Throws DomainError unless 0 < v < kMaxSpeed.
double ov_inverse(double v);

struct ModelParams {
    double alpha = 1.0;  // relaxation gain
    double beta = 1.0;   // follow-the-leader gain
    double vbar = 0.8;   // leader speed
    int n_vehicles = 2;  // leader included

    int followers() const noexcept { return n_vehicles - 1; }
    double x_infinity() const { return ov_inverse(vbar); }

    // Throws ValidationError naming the first violated invariant.
    void validate() const;
};

// Positions and velocities of vehicles 0..N; vehicle 0 leads at constant speed.
struct PlatoonState {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> y;
};

// Leader-relative coordinates X_n = x_0 - x_n, Y_n = vbar - y_n for n = 1..N.
struct RelativeState {
    double t = 0.0;
    std::vector<double> X;
    std::vector<double> Y;
};

// Pairwise gaps xi_n = X_n - X_{n-1} and their rates zeta_n = Y_n - Y_{n-1}.
struct DifferenceState {
    double t = 0.0;
    std::vector<double> xi;
    std::vector<double> zeta;
};

struct Equilibrium {
    double x_infinity = 0.0;
    RelativeState states;
};

enum class CoordinateSystem { Absolute, Relative, Difference };

std::string_view to_string(CoordinateSystem system);
CoordinateSystem coordinate_system_from_string(std::string_view name);

Equilibrium equilibrium(const ModelParams& p);

// Vector fields. The derivative is returned in the same container type as
// the state; t is copied unchanged. Any nonpositive gap throws SingularityError.
PlatoonState vf_absolute(const ModelParams& p, const PlatoonState& s);
RelativeState vf_relative(const ModelParams& p, const RelativeState& s);
DifferenceState vf_difference(const ModelParams& p, const DifferenceState& s);

// Flat-array forms used by the integrator.
//   absolute:   [x_0..x_N, y_0..y_N]
//   relative:   [X_1..X_N, Y_1..Y_N]
//   difference: [xi_1..xi_N, zeta_1..zeta_N]
void absolute_rhs(const ModelParams& p, std::span<const double> s, std::span<double> ds);
void relative_rhs(const ModelParams& p, std::span<const double> s, std::span<double> ds);
void difference_rhs(const ModelParams& p, std::span<const double> s, std::span<double> ds);

// Number of followers encoded in a flat state of the given system.
int followers_in(CoordinateSystem system, std::size_t flat_size);

// Smallest inter-vehicle gap of a flat state.
double min_gap(CoordinateSystem system, std::span<const double> s);

std::vector<double> flatten(const PlatoonState& s);
std::vector<double> flatten(const RelativeState& s);
std::vector<double> flatten(const DifferenceState& s);

// Coordinate changes. Ordering violations throw ValidationError.
RelativeState to_relative(const PlatoonState& s, double vbar);
PlatoonState to_absolute(const RelativeState& s, double x0_initial, double vbar);
DifferenceState to_difference(const RelativeState& s);
RelativeState from_difference(const DifferenceState& s);

// Interprets a flat state of any system as a relative state. For the absolute
// system vbar is unused (the leader velocity is part of the state).
RelativeState relative_view(CoordinateSystem system, double t, std::span<const double> s);

// Throws ValidationError unless every gap is positive and every relative speed
// lies in (vbar - V(inf), vbar].
void validate_relative(const RelativeState& s, double vbar);

} // namespace ovfl
