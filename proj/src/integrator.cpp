#include "ovfl/integrator.hpp"

#include "ovfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ovfl {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Continuous extension (Hairer, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kMinStep = 1e-14;
constexpr double kEventTimeTol = 1e-13;

bool crossed(Direction dir, double ga, double gb) {
    const bool rising = ga < 0.0 && gb >= 0.0;
    const bool falling = ga > 0.0 && gb <= 0.0;
    switch (dir) {
    case Direction::Rising: return rising;
    case Direction::Falling: return falling;
    case Direction::Either: return rising || falling;
    }
    return false;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

struct StageFailure {};

// Bisection on the continuous extension of one segment. Returns the time on
// the post-crossing side of the bracket.
double bisect_event(const Trajectory& traj, std::size_t seg, const EventSpec& spec, double ga,
                    std::vector<double>& scratch) {
    double a = traj.times()[seg];
    double b = traj.times()[seg + 1];
    while (b - a > kEventTimeTol * std::max(1.0, std::fabs(b))) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        traj.eval_segment(seg, mid, scratch);
        const double gm = spec.g(mid, scratch);
        if ((ga < 0.0 && gm < 0.0) || (ga > 0.0 && gm > 0.0)) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return b;
}

// Crossing events of `spec` on segment `seg`, given g at both ends.
std::optional<Event> scan_segment(const Trajectory& traj, std::size_t seg, const EventSpec& spec, double ga,
                                  double gb, std::vector<double>& scratch) {
    if (!crossed(spec.direction, ga, gb)) return std::nullopt;
    Event ev;
    ev.kind = spec.kind;
    ev.vehicle = spec.vehicle;
    ev.time = bisect_event(traj, seg, spec, ga, scratch);
    ev.state = traj.at(ev.time);
    return ev;
}

} // namespace

std::string_view to_string(EventKind kind) {
    switch (kind) {
    case EventKind::TInfinity: return "T_INFINITY";
    case EventKind::TInfinityEps: return "T_INFINITY_EPS";
    case EventKind::TCheck: return "T_CHECK";
    case EventKind::YSignChange: return "Y_SIGN_CHANGE";
    case EventKind::CollisionGuard: return "COLLISION_GUARD";
    case EventKind::EnergyViolation: return "ENERGY_VIOLATION";
    }
    return "UNKNOWN";
}

void IntegratorConfig::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw ValidationError("rtol and atol must be positive");
    if (!(t_end > 0.0)) throw ValidationError("t_end must be positive");
    if (!(max_step > 0.0)) throw ValidationError("max_step must be positive");
    if (!(singular_guard > 0.0)) throw ValidationError("singular_guard must be positive");
    if (!(step_cap_coefficient > 0.0)) throw ValidationError("step_cap_coefficient must be positive");
    if (fixed_step < 0.0) throw ValidationError("fixed_step must be nonnegative");
}

OdeSystem platoon_system(CoordinateSystem system, const ModelParams& p) {
    p.validate();
    OdeSystem sys;
    const auto n_f = static_cast<std::size_t>(p.followers());
    sys.dim = system == CoordinateSystem::Absolute ? 2 * (n_f + 1) : 2 * n_f;
    switch (system) {
    case CoordinateSystem::Absolute:
        sys.rhs = [p](double, std::span<const double> y, std::span<double> dy) { absolute_rhs(p, y, dy); };
        break;
    case CoordinateSystem::Relative:
        sys.rhs = [p](double, std::span<const double> y, std::span<double> dy) { relative_rhs(p, y, dy); };
        break;
    case CoordinateSystem::Difference:
        sys.rhs = [p](double, std::span<const double> y, std::span<double> dy) { difference_rhs(p, y, dy); };
        break;
    }
    sys.min_gap = [system](std::span<const double> y) { return ovfl::min_gap(system, y); };
    sys.step_cap_threshold = 0.25 * p.x_infinity();
    sys.beta = p.beta;
    return sys;
}

OdeSystem harmonic_oscillator() {
    OdeSystem sys;
    sys.dim = 2;
    sys.rhs = [](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    return sys;
}

std::span<const double> Trajectory::state(std::size_t i) const {
    return std::span<const double>(states_).subspan(i * dim_, dim_);
}

void Trajectory::eval_segment(std::size_t seg, double t, std::span<double> out) const {
    const double t0 = times_[seg];
    const double h = times_[seg + 1] - t0;
    const double theta = (t - t0) / h;
    const double theta1 = 1.0 - theta;
    const double* r = dense_.data() + seg * 5 * dim_;
    for (std::size_t i = 0; i < dim_; ++i) {
        const double r1 = r[i], r2 = r[dim_ + i], r3 = r[2 * dim_ + i], r4 = r[3 * dim_ + i],
                     r5 = r[4 * dim_ + i];
        out[i] = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
    }
}

std::vector<double> Trajectory::at(double t) const {
    if (times_.empty() || !(t >= times_.front() && t <= times_.back())) {
        throw RangeError("time " + std::to_string(t) + " outside trajectory interval [" +
                         std::to_string(times_.empty() ? 0.0 : times_.front()) + ", " +
                         std::to_string(times_.empty() ? 0.0 : times_.back()) + "]");
    }
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const auto k = static_cast<std::size_t>(it - times_.begin());
    if (*it == t) {
        auto s = state(k);
        return {s.begin(), s.end()};
    }
    std::vector<double> out(dim_);
    eval_segment(k - 1, t, out);
    return out;
}

Trajectory integrate(const OdeSystem& system, std::span<const double> y0, double t0, const IntegratorConfig& cfg,
                     std::span<const EventSpec> events) {
    cfg.validate();
    const std::size_t n = system.dim;
    if (y0.size() != n) {
        throw ValidationError("initial state has dimension " + std::to_string(y0.size()) + ", expected " +
                              std::to_string(n));
    }
    if (!all_finite(y0)) throw ValidationError("initial state contains non-finite values");
    if (system.min_gap) {
        const double g = system.min_gap(y0);
        if (!(g > cfg.singular_guard)) {
            throw ValidationError("initial state has gap " + std::to_string(g) + " at or below the singular guard");
        }
    }
    const double t_final = t0 + cfg.t_end;

    Trajectory traj;
    traj.dim_ = n;
    traj.times_.push_back(t0);
    traj.states_.assign(y0.begin(), y0.end());

    std::vector<double> y(y0.begin(), y0.end()), ynew(n), ystage(n), err(n);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), scratch(n);

    auto eval = [&](double t, std::span<const double> s, std::vector<double>& out) {
        if (system.min_gap && !(system.min_gap(s) > cfg.singular_guard)) throw StageFailure{};
        try {
            system.rhs(t, s, out);
        } catch (const SingularityError&) {
            throw StageFailure{};
        }
        if (!all_finite(out)) throw StageFailure{};
    };

    auto norm = [&](std::span<const double> v, std::span<const double> ya, std::span<const double> yb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sk = cfg.atol + cfg.rtol * std::max(std::fabs(ya[i]), std::fabs(yb[i]));
            acc += (v[i] / sk) * (v[i] / sk);
        }
        return std::sqrt(acc / static_cast<double>(n));
    };

    auto step_cap = [&](std::span<const double> s) {
        double cap = cfg.max_step;
        if (system.min_gap && system.step_cap_threshold > 0.0) {
            const double g = system.min_gap(s);
            if (g < system.step_cap_threshold) {
                cap = std::min(cap, cfg.step_cap_coefficient * g * g / system.beta);
            }
        }
        return cap;
    };

    // Event bookkeeping.
    std::vector<double> g_prev(events.size());
    std::vector<bool> done(events.size(), false);
    for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].g(t0, y);

    eval(t0, y, k1);
    double t = t0;

    double h = 0.0;
    if (cfg.fixed_step > 0.0) {
        h = cfg.fixed_step;
    } else {
        // Initial step selection following Hairer & Wanner.
        const double dnf = norm(k1, y, y);
        const double dny = norm(y, y, y);
        double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
        h0 = std::min(h0, step_cap(y));
        double der2 = 0.0;
        try {
            for (std::size_t i = 0; i < n; ++i) ystage[i] = y[i] + h0 * k1[i];
            eval(t + h0, ystage, k2);
            for (std::size_t i = 0; i < n; ++i) err[i] = (k2[i] - k1[i]) / h0;
            der2 = norm(err, y, y);
        } catch (const StageFailure&) {
            der2 = 0.0;
        }
        const double der12 = std::max(der2, dnf);
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / der12, 0.2);
        h = std::min({100.0 * h0, h1, step_cap(y)});
    }

    constexpr double safe = 0.9, beta_pi = 0.04, expo1 = 0.2 - beta_pi * 0.75;
    constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
    double facold = 1e-4;
    bool last_rejected = false;
    std::size_t steps = 0;

    while (t < t_final) {
        if (++steps > cfg.max_steps) {
            throw StiffnessError(t, h, y);
        }
        if (cfg.fixed_step <= 0.0) h = std::min(h, step_cap(y));
        if (t + 1.0001 * h >= t_final) h = t_final - t;

        bool stage_failed = false;
        try {
            for (std::size_t i = 0; i < n; ++i) ystage[i] = y[i] + h * a21 * k1[i];
            eval(t + c2 * h, ystage, k2);
            for (std::size_t i = 0; i < n; ++i) ystage[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            eval(t + c3 * h, ystage, k3);
            for (std::size_t i = 0; i < n; ++i) ystage[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            eval(t + c4 * h, ystage, k4);
            for (std::size_t i = 0; i < n; ++i)
                ystage[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            eval(t + c5 * h, ystage, k5);
            for (std::size_t i = 0; i < n; ++i)
                ystage[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            eval(t + h, ystage, k6);
            for (std::size_t i = 0; i < n; ++i)
                ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
            eval(t + h, ynew, k7);
        } catch (const StageFailure&) {
            stage_failed = true;
        }

        if (stage_failed) {
            ++traj.rejected_;
            last_rejected = true;
            h *= 0.25;
            if (h < kMinStep) {
                // Without gaps there is no guard to press into: the field itself
                // blew up.
                if (!system.min_gap) throw StiffnessError(t, h, y);
                // Stages keep leaving the admissible region: the trajectory is
                // pressing into the singular guard.
                Event ev;
                ev.kind = EventKind::CollisionGuard;
                ev.time = t;
                ev.vehicle = 0;
                ev.state = y;
                traj.events_.push_back(std::move(ev));
                traj.collided_ = true;
                return traj;
            }
            continue;
        }

        double errn = 0.0;
        if (cfg.fixed_step <= 0.0) {
            for (std::size_t i = 0; i < n; ++i)
                err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            errn = norm(err, y, ynew);
        }

        const double fac11 = std::pow(errn, expo1);
        if (errn > 1.0) {
            ++traj.rejected_;
            last_rejected = true;
            h /= std::min(facc1, fac11 / safe);
            if (h < kMinStep) throw StiffnessError(t, h, y);
            continue;
        }

        // Accept.
        double fac = fac11 / std::pow(facold, beta_pi);
        fac = std::max(facc2, std::min(facc1, fac / safe));
        double hnew = h / fac;
        facold = std::max(errn, 1e-4);

        const std::size_t seg = traj.segments();
        const std::size_t base = traj.dense_.size();
        traj.dense_.resize(base + 5 * n);
        double* r = traj.dense_.data() + base;
        for (std::size_t i = 0; i < n; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            r[i] = y[i];
            r[n + i] = ydiff;
            r[2 * n + i] = bspl;
            r[3 * n + i] = ydiff - h * k7[i] - bspl;
            r[4 * n + i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        const double t_new = (h == t_final - t) ? t_final : t + h;
        traj.times_.push_back(t_new);
        traj.states_.insert(traj.states_.end(), ynew.begin(), ynew.end());

        std::vector<Event> found;
        for (std::size_t e = 0; e < events.size(); ++e) {
            const EventSpec& spec = events[e];
            const double gb = spec.g(t_new, ynew);
            if (!done[e]) {
                if (spec.trigger == EventSpec::Trigger::Increase) {
                    if (gb > g_prev[e] + spec.slack * (1.0 + std::fabs(g_prev[e]))) {
                        found.push_back(Event{spec.kind, t_new, spec.vehicle, ynew});
                    }
                } else if (auto ev = scan_segment(traj, seg, spec, g_prev[e], gb, scratch)) {
                    found.push_back(std::move(*ev));
                    if (spec.first_only) done[e] = true;
                }
            }
            g_prev[e] = gb;
        }
        std::stable_sort(found.begin(), found.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
        for (auto& ev : found) traj.events_.push_back(std::move(ev));

        std::swap(y, ynew);
        std::swap(k1, k7);  // first-same-as-last
        t = t_new;

        if (cfg.fixed_step > 0.0) {
            h = cfg.fixed_step;
        } else {
            if (last_rejected) hnew = std::min(hnew, h);
            last_rejected = false;
            h = std::min(hnew, cfg.max_step);
        }
    }
    return traj;
}

std::vector<Event> locate_events(const Trajectory& traj, const EventSpec& spec) {
    std::vector<Event> out;
    if (traj.size() < 2) return out;
    std::vector<double> scratch(traj.dim());
    double ga = spec.g(traj.times()[0], traj.state(0));
    for (std::size_t seg = 0; seg < traj.segments(); ++seg) {
        const double gb = spec.g(traj.times()[seg + 1], traj.state(seg + 1));
        if (spec.trigger == EventSpec::Trigger::Increase) {
            if (gb > ga + spec.slack * (1.0 + std::fabs(ga))) {
                auto s = traj.state(seg + 1);
                out.push_back(Event{spec.kind, traj.times()[seg + 1], spec.vehicle, {s.begin(), s.end()}});
            }
        } else if (auto ev = scan_segment(traj, seg, spec, ga, gb, scratch)) {
            out.push_back(std::move(*ev));
            if (spec.first_only) break;
        }
        ga = gb;
    }
    return out;
}

std::optional<Event> detect_event(const Trajectory& traj, const EventSpec& spec, double after) {
    for (auto& ev : locate_events(traj, spec)) {
        if (ev.time > after) return ev;
    }
    return std::nullopt;
}

std::vector<std::vector<double>> resample(const Trajectory& traj, std::span<const double> times) {
    std::vector<std::vector<double>> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(traj.at(t));
    return out;
}

} // namespace ovfl
