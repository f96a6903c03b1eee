#pragma once

#include "ovfl/model.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ovfl {

using RhsFunction = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;
using ScalarFunction = std::function<double(double t, std::span<const double> y)>;

// An autonomous or time-dependent ODE y' = f(t, y) plus the optional gap
// structure used for the collision guard and the near-singularity step cap.
struct OdeSystem {
    std::size_t dim = 0;
    RhsFunction rhs;
    std::function<double(std::span<const double>)> min_gap;  // empty: no gaps
    double step_cap_threshold = 0.0;  // cap applies while min gap < threshold
    double beta = 1.0;
};

// OVFL vector field in the requested coordinates for N = p.followers().
OdeSystem platoon_system(CoordinateSystem system, const ModelParams& p);

// x' = v, v' = -x. Used to measure convergence order.
OdeSystem harmonic_oscillator();

struct IntegratorConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.5;
    double t_end = 100.0;
    double singular_guard = 1e-9;
    double step_cap_coefficient = 0.5;
    double fixed_step = 0.0;  // > 0 takes uniform steps without error control
    std::size_t max_steps = 20'000'000;

    void validate() const;
};

enum class EventKind { TInfinity, TInfinityEps, TCheck, YSignChange, CollisionGuard, EnergyViolation };

std::string_view to_string(EventKind kind);

enum class Direction { Rising, Falling, Either };

struct EventSpec {
    enum class Trigger {
        Crossing,  // root of g in the given direction, located by bisection
        Increase,  // g at a step end exceeds g at its start by more than slack * (1 + |g|)
    };

    EventKind kind = EventKind::YSignChange;
    int vehicle = 1;
    Direction direction = Direction::Either;
    ScalarFunction g;
    bool first_only = false;
    Trigger trigger = Trigger::Crossing;
    double slack = 0.0;
};

struct Event {
    EventKind kind = EventKind::YSignChange;
    double time = 0.0;
    int vehicle = 0;
    std::vector<double> state;
};

// Accepted steps of an integration with their Dormand-Prince continuous
// extension. Immutable once returned by integrate().
class Trajectory {
public:
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return times_.size(); }
    std::size_t segments() const noexcept { return times_.empty() ? 0 : times_.size() - 1; }

    const std::vector<double>& times() const noexcept { return times_; }
    std::span<const double> state(std::size_t i) const;
    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }

    // Dense-output evaluation. Stored sample times return the stored state.
    // Throws RangeError outside [t_begin, t_end].
    std::vector<double> at(double t) const;

    // Evaluates the continuous extension of one segment (no range check).
    void eval_segment(std::size_t segment, double t, std::span<double> out) const;

    const std::vector<Event>& events() const noexcept { return events_; }
    bool collided() const noexcept { return collided_; }

    std::size_t accepted_steps() const noexcept { return segments(); }
    std::size_t rejected_steps() const noexcept { return rejected_; }

private:
    friend Trajectory integrate(const OdeSystem&, std::span<const double>, double, const IntegratorConfig&,
                                std::span<const EventSpec>);

    std::size_t dim_ = 0;
    std::vector<double> times_;
    std::vector<double> states_;  // size() * dim_
    std::vector<double> dense_;   // segments() * 5 * dim_
    std::vector<Event> events_;
    std::size_t rejected_ = 0;
    bool collided_ = false;
};

// Dormand-Prince 5(4) with PI step control, near-singularity step cap and
// event location. Terminates at cfg.t_end or on a collision guard event.
// Throws ValidationError for inadmissible input and StiffnessError when the
// step size falls below 1e-14.
Trajectory integrate(const OdeSystem& system, std::span<const double> y0, double t0,
                     const IntegratorConfig& cfg, std::span<const EventSpec> events = {});

// All occurrences of a crossing event on a finished trajectory, using the same
// bracketing and bisection as the integrator (first_only is honoured).
std::vector<Event> locate_events(const Trajectory& traj, const EventSpec& spec);

// First occurrence strictly after `after`, if any.
std::optional<Event> detect_event(const Trajectory& traj, const EventSpec& spec, double after);

// Dense-output states at the given times. Throws RangeError for times outside
// the trajectory interval.
std::vector<std::vector<double>> resample(const Trajectory& traj, std::span<const double> times);

} // namespace ovfl
