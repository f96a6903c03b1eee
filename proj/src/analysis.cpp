#include "ovfl/analysis.hpp"

#include "ovfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ovfl {

namespace {

std::vector<double> row_state(const SampleRow& r) {
    std::vector<double> s(r.X);
    s.insert(s.end(), r.Y.begin(), r.Y.end());
    return s;
}

// Tracks the largest violation seen so far and where it happened.
struct Worst {
    double value = -std::numeric_limits<double>::infinity();
    const SampleRow* row = nullptr;

    void offer(double v, const SampleRow& r) {
        if (v > value) {
            value = v;
            row = &r;
        }
    }
};

MonitorReport finish(std::string name, const Worst& w, double tolerance) {
    MonitorReport m;
    m.name = std::move(name);
    m.tolerance = tolerance;
    if (w.row) {
        m.worst_violation = w.value;
        m.time = w.row->t;
        m.state = row_state(*w.row);
    }
    m.passed = m.worst_violation <= tolerance;
    return m;
}

MonitorReport vacuous(std::string name) {
    MonitorReport m;
    m.name = std::move(name);
    m.details["vacuous"] = 1.0;
    return m;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// Index of the first row at which X_1 reaches or crosses X_inf (rows.size() if never).
std::size_t t_infinity_index(const SampleTable& table, double x_inf) {
    const auto& rows = table.rows;
    if (rows.empty()) return 0;
    const int s0 = sign_of(rows[0].X[0] - x_inf);
    if (s0 == 0) return 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (sign_of(rows[i].X[0] - x_inf) != s0) return i;
    }
    return rows.size();
}

void require_single_pair(const SampleTable& table) {
    if (table.followers != 1) {
        throw ValidationError("expected a trajectory of the two-vehicle system (N = 1), got N = " +
                              std::to_string(table.followers));
    }
}

// First zero crossing of Y_1 in [0, end) in the given direction; returns the
// index of the row after the crossing and the interpolated gap there.
std::optional<std::pair<std::size_t, double>> y1_crossing(const SampleTable& table, std::size_t end, bool rising) {
    const auto& rows = table.rows;
    for (std::size_t i = 1; i < end; ++i) {
        const double ya = rows[i - 1].Y[0];
        const double yb = rows[i].Y[0];
        const bool hit = rising ? (ya < 0.0 && yb >= 0.0) : (ya > 0.0 && yb <= 0.0);
        if (hit) {
            const double w = ya / (ya - yb);
            const double x = rows[i - 1].X[0] + w * (rows[i].X[0] - rows[i - 1].X[0]);
            return std::make_pair(i, x);
        }
    }
    return std::nullopt;
}

double first_pair_x(CoordinateSystem system, std::span<const double> s) {
    return system == CoordinateSystem::Absolute ? s[0] - s[1] : s[0];
}

double first_pair_y(CoordinateSystem system, std::span<const double> s) {
    const std::size_t half = s.size() / 2;
    return system == CoordinateSystem::Absolute ? s[half] - s[half + 1] : s[half];
}

} // namespace

std::string_view to_string(RegionLabel label) {
    switch (label) {
    case RegionLabel::U1: return "U1";
    case RegionLabel::L1: return "L1";
    case RegionLabel::U2: return "U2";
    case RegionLabel::L2: return "L2";
    case RegionLabel::AxisX: return "AXIS_X";
    case RegionLabel::AxisY: return "AXIS_Y";
    case RegionLabel::Equilibrium: return "EQUILIBRIUM";
    }
    return "UNKNOWN";
}

RegionLabel classify_region(double x, double y, double x_infinity) {
    if (x == x_infinity && y == 0.0) return RegionLabel::Equilibrium;
    if (x == x_infinity) return RegionLabel::AxisY;
    if (y == 0.0) return RegionLabel::AxisX;
    if (x < x_infinity) return y > 0.0 ? RegionLabel::U1 : RegionLabel::L1;
    return y > 0.0 ? RegionLabel::U2 : RegionLabel::L2;
}

std::vector<MonitorReport> verify_region_lemmas(const SampleTable& table, const ModelParams& p) {
    require_single_pair(table);
    std::vector<MonitorReport> out;
    const auto& rows = table.rows;
    if (rows.empty()) {
        out.push_back(vacuous("region_lemma"));
        return out;
    }
    const double x_inf = p.x_infinity();
    const RegionLabel start = classify_region(rows[0].X[0], rows[0].Y[0], x_inf);
    const std::size_t k_inf = t_infinity_index(table, x_inf);
    constexpr double tol = 1e-8;

    auto annotate = [&](MonitorReport& m) {
        m.details["t_infinity_reached"] = k_inf < rows.size() ? 1.0 : 0.0;
        m.details["t_infinity"] = k_inf < rows.size() ? rows[k_inf].t : rows.back().t;
        m.details["rows_checked"] = static_cast<double>(k_inf);
    };

    switch (start) {
    case RegionLabel::U1: {
        // Y_1 stays positive until X_1 reaches X_inf.
        Worst w;
        for (std::size_t i = 0; i < k_inf; ++i) w.offer(-rows[i].Y[0], rows[i]);
        auto m = finish("lemma_U1_invariance", w, tol);
        annotate(m);
        out.push_back(std::move(m));
        break;
    }
    case RegionLabel::L2: {
        Worst w;
        for (std::size_t i = 0; i < k_inf; ++i) w.offer(rows[i].Y[0], rows[i]);
        auto m = finish("lemma_L2_invariance", w, tol);
        annotate(m);
        out.push_back(std::move(m));
        break;
    }
    case RegionLabel::L1: {
        // Y_1 turns positive (with positive slope) before T_inf and stays positive.
        Worst w;
        const auto hit = y1_crossing(table, k_inf, true);
        MonitorReport m;
        if (!hit) {
            for (std::size_t i = 0; i < k_inf; ++i) w.offer(rows[i].Y[0], rows[i]);
            // Closest approach to zero from below, as a positive violation.
            w.value = -w.value;
            m = finish("lemma_L1_zero_crossing", w, tol);
            m.details["crossing_found"] = 0.0;
        } else {
            const auto [idx, x_c] = *hit;
            const double slope = -p.alpha * (ov_value(x_c) - p.vbar);
            w.offer(-slope, rows[idx]);
            for (std::size_t i = idx; i < k_inf; ++i) w.offer(-rows[i].Y[0], rows[i]);
            m = finish("lemma_L1_zero_crossing", w, tol);
            m.details["crossing_found"] = 1.0;
            m.details["crossing_time"] = rows[idx].t;
            m.details["crossing_slope"] = slope;
        }
        annotate(m);
        out.push_back(std::move(m));
        break;
    }
    case RegionLabel::U2: {
        // Y_1 turns negative (with negative slope) before T_inf.
        Worst w;
        const auto hit = y1_crossing(table, k_inf, false);
        MonitorReport m;
        if (!hit) {
            w.value = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < k_inf; ++i) {
                if (rows[i].Y[0] < w.value) {
                    w.value = rows[i].Y[0];
                    w.row = &rows[i];
                }
            }
            m = finish("lemma_U2_zero_crossing", w, tol);
            m.details["crossing_found"] = 0.0;
        } else {
            const auto [idx, x_c] = *hit;
            const double slope = -p.alpha * (ov_value(x_c) - p.vbar);
            w.offer(slope, rows[idx]);
            m = finish("lemma_U2_zero_crossing", w, tol);
            m.details["crossing_found"] = 1.0;
            m.details["crossing_time"] = rows[idx].t;
            m.details["crossing_slope"] = slope;
        }
        annotate(m);
        out.push_back(std::move(m));
        break;
    }
    case RegionLabel::AxisX:
    case RegionLabel::AxisY:
    case RegionLabel::Equilibrium:
        out.push_back(vacuous("region_lemma"));
        break;
    }
    out.back().details["start_region"] = static_cast<double>(start);
    return out;
}

std::vector<MonitorReport> verify_energy_and_bounds(const SampleTable& table, const ModelParams& p,
                                                    const EnergyBudget& budget) {
    std::vector<MonitorReport> out;
    const auto& rows = table.rows;

    {
        // max over t1 < t2 of H(t2) - H(t1).
        Worst w;
        double h_min = std::numeric_limits<double>::infinity();
        double t_min = 0.0;
        double interval_start = 0.0;
        for (const auto& r : rows) {
            if (std::isfinite(h_min)) {
                const double inc = r.H1 - h_min;
                if (inc > w.value) interval_start = t_min;
                w.offer(inc, r);
            }
            if (r.H1 < h_min) {
                h_min = r.H1;
                t_min = r.t;
            }
        }
        if (!w.row) w.value = 0.0;
        auto m = finish("energy_monotone", w, 1e-7 * (1.0 + budget.h_circ));
        if (w.row) {
            m.details["interval_start"] = interval_start;
            m.details["interval_end"] = w.row->t;
        }
        m.details["h_circ"] = budget.h_circ;
        out.push_back(std::move(m));
    }
    {
        Worst w;
        for (const auto& r : rows) w.offer(std::fabs(r.Y[0]) - budget.y_bar, r);
        auto m = finish("speed_bound_y_bar", w, 1e-6);
        m.details["y_bar"] = budget.y_bar;
        out.push_back(std::move(m));
    }
    {
        Worst w;
        for (const auto& r : rows) w.offer(r.X[0] - budget.x_bar, r);
        auto m = finish("gap_upper_bound_x_bar", w, 1e-6);
        m.details["x_bar"] = budget.x_bar;
        m.details["x_bar_literal"] = budget.x_bar_literal;
        out.push_back(std::move(m));
    }
    {
        constexpr double guard = 1e-9;
        Worst w;
        double observed = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) {
            w.offer(guard - r.X[0], r);
            observed = std::min(observed, r.X[0]);
        }
        auto m = finish("gap_lower_bound", w, 0.0);
        if (!rows.empty()) m.details["observed_min_x1"] = observed;
        out.push_back(std::move(m));
    }
    if (budget.delta_1_source == Delta1Source::Energy && budget.delta_1) {
        Worst w;
        for (const auto& r : rows) w.offer(*budget.delta_1 - r.X[0], r);
        auto m = finish("gap_lower_bound_delta_1", w, 1e-6);
        m.details["delta_1"] = *budget.delta_1;
        out.push_back(std::move(m));
    }
    (void)p;
    return out;
}

MonitorReport verify_speed_limits(const SampleTable& table, const ModelParams& p, double tol) {
    Worst w;
    const double lo = p.vbar - kMaxSpeed;
    for (const auto& r : table.rows) {
        for (double y : r.Y) {
            w.offer(std::max(y - p.vbar, lo - y), r);
        }
    }
    auto m = finish("speed_limits", w, tol);
    return m;
}

MonitorReport verify_min_gap(const SampleTable& table, double guard) {
    Worst w;
    double observed = std::numeric_limits<double>::infinity();
    for (const auto& r : table.rows) {
        for (double g : r.xi) {
            w.offer(guard - g, r);
            observed = std::min(observed, g);
        }
    }
    auto m = finish("no_collision", w, 0.0);
    if (!table.rows.empty()) m.details["min_gap"] = observed;
    return m;
}

int count_y1_sign_changes(const SampleTable& table, double floor) {
    int count = 0;
    int last = 0;
    for (const auto& r : table.rows) {
        const double y = r.Y[0];
        if (std::fabs(y) <= floor) continue;
        const int s = sign_of(y);
        if (last != 0 && s != last) ++count;
        last = s;
    }
    return count;
}

ConvergenceReport convergence_diagnostics(const SampleTable& table, const ModelParams& p, const EnergyBudget& budget,
                                          double epsilon) {
    ConvergenceReport rep;
    rep.epsilon = epsilon;
    rep.gronwall_rate = budget.gronwall_rate;
    rep.y1_sign_changes = count_y1_sign_changes(table);
    const auto& rows = table.rows;
    const double x_inf = p.x_infinity();

    std::size_t entry = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (std::hypot(rows[i].X[0] - x_inf, rows[i].Y[0]) < epsilon) {
            entry = i;
            break;
        }
    }
    if (entry == rows.size()) return rep;

    rep.entered_ball = true;
    rep.entry_time = rows[entry].t;
    rep.samples_after_entry = rows.size() - entry - 1;
    if (rep.samples_after_entry < 10) {
        throw InsufficientDataError("only " + std::to_string(rep.samples_after_entry) +
                                    " samples after ball entry; at least 10 are needed to fit a decay rate");
    }

    // H below this level is dominated by integration error.
    constexpr double kFloor = 1e-12;
    const double h_entry = rows[entry].H1;
    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    std::size_t m = 0;
    double envelope = std::numeric_limits<double>::infinity();
    for (std::size_t i = entry; i < rows.size(); ++i) {
        const double h = rows[i].H1;
        if (!(h > kFloor)) continue;
        const double t = rows[i].t;
        const double l = std::log(h);
        st += t;
        sl += l;
        stt += t * t;
        stl += t * l;
        ++m;
        if (i > entry && h_entry > kFloor && t > rows[entry].t) {
            envelope = std::min(envelope, -std::log(h / h_entry) / (t - rows[entry].t));
        }
    }
    if (m >= 2) {
        const double denom = static_cast<double>(m) * stt - st * st;
        if (denom > 0.0) rep.fitted_rate = -(static_cast<double>(m) * stl - st * sl) / denom;
    }
    if (std::isfinite(envelope)) rep.envelope_rate = envelope;
    return rep;
}

EventSpec t_infinity_event(CoordinateSystem system, const ModelParams& p) {
    const double x_inf = p.x_infinity();
    EventSpec e;
    e.kind = EventKind::TInfinity;
    e.vehicle = 1;
    e.direction = Direction::Either;
    e.first_only = true;
    e.g = [system, x_inf](double, std::span<const double> s) { return first_pair_x(system, s) - x_inf; };
    return e;
}

EventSpec t_infinity_eps_event(CoordinateSystem system, const ModelParams& p, double epsilon) {
    const double x_inf = p.x_infinity();
    EventSpec e;
    e.kind = EventKind::TInfinityEps;
    e.vehicle = 1;
    e.direction = Direction::Falling;
    e.first_only = true;
    e.g = [system, x_inf, epsilon](double, std::span<const double> s) {
        return std::hypot(first_pair_x(system, s) - x_inf, first_pair_y(system, s)) - epsilon;
    };
    return e;
}

EventSpec y_sign_change_event(CoordinateSystem system) {
    EventSpec e;
    e.kind = EventKind::YSignChange;
    e.vehicle = 1;
    e.direction = Direction::Either;
    e.g = [system](double, std::span<const double> s) { return first_pair_y(system, s); };
    return e;
}

EventSpec t_check_event(CoordinateSystem system, double half_delta_2) {
    EventSpec e;
    e.kind = EventKind::TCheck;
    e.vehicle = 2;
    e.direction = Direction::Falling;
    e.first_only = true;
    e.g = [system, half_delta_2](double t, std::span<const double> s) {
        if (system == CoordinateSystem::Difference) return s[1] - half_delta_2;
        const RelativeState r = relative_view(system, t, s);
        return (r.X[1] - r.X[0]) - half_delta_2;
    };
    return e;
}

EventSpec energy_violation_event(CoordinateSystem system, const ModelParams& p, double slack) {
    EventSpec e;
    e.kind = EventKind::EnergyViolation;
    e.vehicle = 1;
    e.trigger = EventSpec::Trigger::Increase;
    e.slack = slack;
    e.g = [system, p](double, std::span<const double> s) {
        const double x = first_pair_x(system, s);
        return x > 0.0 ? hamiltonian(p, x, first_pair_y(system, s)) : 0.0;
    };
    return e;
}

} // namespace ovfl
