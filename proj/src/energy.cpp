#include "ovfl/energy.hpp"

#include "ovfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ovfl {

namespace {

// log(cosh(z)) without overflow for large |z|.
double log_cosh(double z) {
    const double a = std::fabs(z);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

// Antiderivative of V(s) - vbar.
double primitive(double x, double vbar) { return log_cosh(x - 2.0) + (kTanh2 - vbar) * x; }

double potential_unchecked(const ModelParams& p, double x, double x_inf) {
    return p.alpha * (primitive(x, p.vbar) - primitive(x_inf, p.vbar));
}

template <class F>
double bisect(F&& f, double lo, double hi) {
    // f(lo) < 0 <= f(hi)
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

void finish_constants(const ModelParams& p, EnergyBudget& b) {
    const double lo = b.delta_1.value_or(0.0);
    const double hi = b.x_bar;
    // V' is unimodal, so the grid minimum sits at an end point; both ends are
    // included explicitly and the grid guards against a degenerate interval.
    double min_slope = std::min(ov_slope(lo), ov_slope(hi));
    constexpr int kGrid = 10000;
    for (int i = 0; i <= kGrid; ++i) {
        const double x = lo + (hi - lo) * i / kGrid;
        min_slope = std::min(min_slope, ov_slope(x));
    }
    b.k_sc = p.alpha * min_slope;
    b.k_upper = std::max(0.5, p.alpha);
    b.k_lower = std::min(0.5, 0.5 * b.k_sc);
    b.k19 = 0.5 * (p.alpha + p.beta / (b.x_bar * b.x_bar));
    b.gronwall_rate = b.k19 / b.k_upper;
}

} // namespace

double potential(const ModelParams& p, double x) {
    if (!(x > 0.0)) {
        throw DomainError("potential: gap must be positive, got " + std::to_string(x));
    }
    return potential_unchecked(p, x, p.x_infinity());
}

double potential_slope(const ModelParams& p, double x) { return p.alpha * (ov_value(x) - p.vbar); }

double potential_at_contact(const ModelParams& p) { return potential_unchecked(p, 0.0, p.x_infinity()); }

double potential_shifted(const ModelParams& p, double u) {
    const double x_inf = p.x_infinity();
    if (!(u > -x_inf)) {
        throw DomainError("potential_shifted: u must exceed -X_inf = " + std::to_string(-x_inf));
    }
    return potential_unchecked(p, u + x_inf, x_inf);
}

double hamiltonian(const ModelParams& p, double x, double y) { return 0.5 * y * y + potential(p, x); }

double dH_dt(const ModelParams& p, double x, double y) {
    if (!(x > 0.0)) {
        throw DomainError("dH_dt: gap must be positive, got " + std::to_string(x));
    }
    return -(p.alpha + p.beta / (x * x)) * y * y;
}

std::string_view to_string(Delta1Source source) {
    switch (source) {
    case Delta1Source::Energy: return "energy";
    case Delta1Source::Empirical: return "empirical";
    case Delta1Source::Unavailable: return "unavailable";
    }
    return "unknown";
}

std::optional<double> potential_inverse_left(const ModelParams& p, double level) {
    const double x_inf = p.x_infinity();
    if (level <= 0.0) return x_inf;
    if (level >= potential_at_contact(p)) return std::nullopt;
    // P decreases on (0, X_inf): P(x) - level > 0 left of the root.
    return bisect([&](double x) { return level - potential_unchecked(p, x, x_inf); }, 0.0, x_inf);
}

double potential_inverse_right(const ModelParams& p, double level) {
    const double x_inf = p.x_infinity();
    if (level <= 0.0) return x_inf;
    double hi = x_inf + 1.0;
    while (potential_unchecked(p, hi, x_inf) < level) {
        hi = x_inf + 2.0 * (hi - x_inf);
    }
    return bisect([&](double x) { return potential_unchecked(p, x, x_inf) - level; }, x_inf, hi);
}

EnergyBudget energy_budget(const ModelParams& p, double x1, double y1) {
    p.validate();
    if (!(x1 > 0.0) || !std::isfinite(x1)) {
        throw ValidationError("initial gap X_1 must be positive and finite, got " + std::to_string(x1));
    }
    if (!(y1 > p.vbar - kMaxSpeed && y1 <= p.vbar)) {
        throw ValidationError("initial relative speed Y_1 = " + std::to_string(y1) +
                              " violates the speed limits");
    }
    EnergyBudget b;
    b.x_infinity = p.x_infinity();
    b.h_circ = hamiltonian(p, x1, y1);
    b.y_bar = std::sqrt(2.0 * b.h_circ);
    b.x_bar = potential_inverse_right(p, b.h_circ);
    b.x_bar_literal = b.h_circ;
    b.potential_at_contact = potential_at_contact(p);
    b.delta_1 = potential_inverse_left(p, b.h_circ);
    b.delta_1_source = b.delta_1 ? Delta1Source::Energy : Delta1Source::Unavailable;
    finish_constants(p, b);
    return b;
}

EnergyBudget refine_delta1(const ModelParams& p, EnergyBudget budget, double observed_min_x1) {
    if (budget.delta_1_source == Delta1Source::Energy) return budget;
    if (!(observed_min_x1 > 0.0)) {
        throw ValidationError("observed minimum gap must be positive to serve as delta_1");
    }
    budget.delta_1 = observed_min_x1;
    budget.delta_1_source = Delta1Source::Empirical;
    finish_constants(p, budget);
    return budget;
}

SandwichCheck sandwich_grid_check(const ModelParams& p, const EnergyBudget& budget, int n) {
    if (!budget.delta_1) throw ValidationError("sandwich check needs delta_1");
    if (n < 2) throw ValidationError("sandwich grid needs n >= 2");
    SandwichCheck out;
    out.worst_lower = -std::numeric_limits<double>::infinity();
    out.worst_upper = -std::numeric_limits<double>::infinity();
    const double x_inf = budget.x_infinity;
    // open interval in u: interior nodes only
    const double u0 = *budget.delta_1 - x_inf;
    const double u1 = budget.x_bar - x_inf;
    for (int i = 1; i <= n; ++i) {
        const double u = u0 + (u1 - u0) * i / (n + 1);
        const double pu = potential(p, u + x_inf);
        for (int j = 0; j < n; ++j) {
            const double v = -budget.y_bar + 2.0 * budget.y_bar * j / (n - 1);
            const double h = 0.5 * v * v + pu;
            const double norm2 = u * u + v * v;
            out.worst_lower = std::max(out.worst_lower, budget.k_lower * norm2 - h);
            out.worst_upper = std::max(out.worst_upper, h - budget.k_upper * norm2);
            ++out.points;
        }
    }
    return out;
}

} // namespace ovfl
