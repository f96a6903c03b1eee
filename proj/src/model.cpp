#include "ovfl/model.hpp"

#include "ovfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

namespace ovfl {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void check_gap(int index, double gap) {
    if (!(gap > 0.0)) {
        throw SingularityError(index, gap);
    }
}

void check_sizes(std::span<const double> s, std::span<double> ds) {
    if (s.size() != ds.size() || s.size() % 2 != 0 || s.empty()) {
        throw ValidationError("state and derivative buffers must have equal, even, nonzero size");
    }
}

} // namespace

double ov_value(double x) { return std::tanh(x - 2.0) + kTanh2; }

double ov_slope(double x) {
    const double c = std::cosh(x - 2.0);
    return 1.0 / (c * c);
}

double ov_inverse(double v) {
    if (!(v > 0.0 && v < kMaxSpeed)) {
        throw DomainError("ov_inverse: speed " + fmt(v) + " outside the admissible interval (0, " +
                          fmt(kMaxSpeed) + ")");
    }
    return 2.0 + std::atanh(v - kTanh2);
}

void ModelParams::validate() const {
    if (!(alpha > 0.0)) {
        throw ValidationError("alpha must be positive, got " + fmt(alpha));
    }
    if (!(beta > 0.0)) {
        throw ValidationError("beta must be positive, got " + fmt(beta));
    }
    if (!(vbar > 0.0 && vbar < kMaxSpeed)) {
        throw ValidationError("vbar must lie in (0, " + fmt(kMaxSpeed) + "), got " + fmt(vbar));
    }
    if (n_vehicles < 2) {
        throw ValidationError("n_vehicles must be at least 2, got " + std::to_string(n_vehicles));
    }
}

std::string_view to_string(CoordinateSystem system) {
    switch (system) {
    case CoordinateSystem::Absolute: return "absolute";
    case CoordinateSystem::Relative: return "relative";
    case CoordinateSystem::Difference: return "difference";
    }
    return "unknown";
}

CoordinateSystem coordinate_system_from_string(std::string_view name) {
    if (name == "absolute") return CoordinateSystem::Absolute;
    if (name == "relative") return CoordinateSystem::Relative;
    if (name == "difference") return CoordinateSystem::Difference;
    throw ValidationError("unknown coordinate system '" + std::string(name) +
                          "' (expected absolute, relative or difference)");
}

Equilibrium equilibrium(const ModelParams& p) {
    Equilibrium eq;
    eq.x_infinity = ov_inverse(p.vbar);
    const int n = p.followers();
    eq.states.X.resize(static_cast<std::size_t>(std::max(n, 0)));
    eq.states.Y.assign(eq.states.X.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        eq.states.X[static_cast<std::size_t>(i)] = (i + 1) * eq.x_infinity;
    }
    return eq;
}

void absolute_rhs(const ModelParams& p, std::span<const double> s, std::span<double> ds) {
    check_sizes(s, ds);
    const std::size_t m = s.size() / 2;  // N + 1 vehicles
    const auto x = s.first(m);
    const auto y = s.subspan(m);
    for (std::size_t n = 0; n < m; ++n) {
        ds[n] = y[n];
    }
    ds[m] = 0.0;
    for (std::size_t n = 1; n < m; ++n) {
        const double gap = x[n - 1] - x[n];
        check_gap(static_cast<int>(n), gap);
        ds[m + n] = p.alpha * (ov_value(gap) - y[n]) + p.beta * (y[n - 1] - y[n]) / (gap * gap);
    }
}

void relative_rhs(const ModelParams& p, std::span<const double> s, std::span<double> ds) {
    check_sizes(s, ds);
    const std::size_t n_f = s.size() / 2;
    const auto X = s.first(n_f);
    const auto Y = s.subspan(n_f);
    double x_prev = 0.0;
    double y_prev = 0.0;
    for (std::size_t n = 0; n < n_f; ++n) {
        const double gap = X[n] - x_prev;
        check_gap(static_cast<int>(n + 1), gap);
        ds[n] = Y[n];
        ds[n_f + n] = -p.alpha * (ov_value(gap) + Y[n] - p.vbar) - p.beta * (Y[n] - y_prev) / (gap * gap);
        x_prev = X[n];
        y_prev = Y[n];
    }
}

void difference_rhs(const ModelParams& p, std::span<const double> s, std::span<double> ds) {
    check_sizes(s, ds);
    const std::size_t n_f = s.size() / 2;
    const auto xi = s.first(n_f);
    const auto zeta = s.subspan(n_f);
    for (std::size_t n = 0; n < n_f; ++n) {
        check_gap(static_cast<int>(n + 1), xi[n]);
    }
    ds[0] = zeta[0];
    ds[n_f] = -p.alpha * (ov_value(xi[0]) - p.vbar) - p.alpha * zeta[0] - p.beta * zeta[0] / (xi[0] * xi[0]);
    for (std::size_t n = 1; n < n_f; ++n) {
        ds[n] = zeta[n];
        ds[n_f + n] = -p.alpha * (ov_value(xi[n]) - ov_value(xi[n - 1])) - p.alpha * zeta[n] -
                      p.beta * (zeta[n] / (xi[n] * xi[n]) - zeta[n - 1] / (xi[n - 1] * xi[n - 1]));
    }
}

int followers_in(CoordinateSystem system, std::size_t flat_size) {
    const int half = static_cast<int>(flat_size / 2);
    return system == CoordinateSystem::Absolute ? half - 1 : half;
}

double min_gap(CoordinateSystem system, std::span<const double> s) {
    const std::size_t half = s.size() / 2;
    double best = std::numeric_limits<double>::infinity();
    switch (system) {
    case CoordinateSystem::Absolute:
        for (std::size_t n = 1; n < half; ++n) best = std::min(best, s[n - 1] - s[n]);
        break;
    case CoordinateSystem::Relative:
        for (std::size_t n = 0; n < half; ++n) best = std::min(best, s[n] - (n == 0 ? 0.0 : s[n - 1]));
        break;
    case CoordinateSystem::Difference:
        for (std::size_t n = 0; n < half; ++n) best = std::min(best, s[n]);
        break;
    }
    return best;
}

std::vector<double> flatten(const PlatoonState& s) {
    std::vector<double> out(s.x);
    out.insert(out.end(), s.y.begin(), s.y.end());
    return out;
}

std::vector<double> flatten(const RelativeState& s) {
    std::vector<double> out(s.X);
    out.insert(out.end(), s.Y.begin(), s.Y.end());
    return out;
}

std::vector<double> flatten(const DifferenceState& s) {
    std::vector<double> out(s.xi);
    out.insert(out.end(), s.zeta.begin(), s.zeta.end());
    return out;
}

PlatoonState vf_absolute(const ModelParams& p, const PlatoonState& s) {
    if (s.x.size() != s.y.size() || s.x.size() < 2) {
        throw ValidationError("platoon state needs matching position/velocity vectors of length >= 2");
    }
    const auto flat = flatten(s);
    std::vector<double> d(flat.size());
    absolute_rhs(p, flat, d);
    PlatoonState out;
    out.t = s.t;
    out.x.assign(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(s.x.size()));
    out.y.assign(d.begin() + static_cast<std::ptrdiff_t>(s.x.size()), d.end());
    return out;
}

RelativeState vf_relative(const ModelParams& p, const RelativeState& s) {
    if (s.X.size() != s.Y.size() || s.X.empty()) {
        throw ValidationError("relative state needs matching, nonempty X/Y vectors");
    }
    const auto flat = flatten(s);
    std::vector<double> d(flat.size());
    relative_rhs(p, flat, d);
    RelativeState out;
    out.t = s.t;
    out.X.assign(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(s.X.size()));
    out.Y.assign(d.begin() + static_cast<std::ptrdiff_t>(s.X.size()), d.end());
    return out;
}

DifferenceState vf_difference(const ModelParams& p, const DifferenceState& s) {
    if (s.xi.size() != s.zeta.size() || s.xi.empty()) {
        throw ValidationError("difference state needs matching, nonempty xi/zeta vectors");
    }
    const auto flat = flatten(s);
    std::vector<double> d(flat.size());
    difference_rhs(p, flat, d);
    DifferenceState out;
    out.t = s.t;
    out.xi.assign(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(s.xi.size()));
    out.zeta.assign(d.begin() + static_cast<std::ptrdiff_t>(s.xi.size()), d.end());
    return out;
}

RelativeState to_relative(const PlatoonState& s, double vbar) {
    if (s.x.size() != s.y.size() || s.x.size() < 2) {
        throw ValidationError("platoon state needs matching position/velocity vectors of length >= 2");
    }
    for (std::size_t n = 1; n < s.x.size(); ++n) {
        if (!(s.x[n] < s.x[n - 1])) {
            throw ValidationError("positions must be strictly decreasing: x_" + std::to_string(n) +
                                  " = " + fmt(s.x[n]) + " >= x_" + std::to_string(n - 1) + " = " +
                                  fmt(s.x[n - 1]));
        }
    }
    RelativeState out;
    out.t = s.t;
    for (std::size_t n = 1; n < s.x.size(); ++n) {
        out.X.push_back(s.x[0] - s.x[n]);
        out.Y.push_back(vbar - s.y[n]);
    }
    return out;
}

namespace {

void check_relative_ordering(const RelativeState& s) {
    if (s.X.size() != s.Y.size() || s.X.empty()) {
        throw ValidationError("relative state needs matching, nonempty X/Y vectors");
    }
    double prev = 0.0;
    for (std::size_t n = 0; n < s.X.size(); ++n) {
        if (!(s.X[n] > prev)) {
            throw ValidationError("relative positions must satisfy 0 < X_1 < ... < X_N; violated at X_" +
                                  std::to_string(n + 1) + " = " + fmt(s.X[n]));
        }
        prev = s.X[n];
    }
}

} // namespace

PlatoonState to_absolute(const RelativeState& s, double x0_initial, double vbar) {
    check_relative_ordering(s);
    PlatoonState out;
    out.t = s.t;
    const double x0 = x0_initial + vbar * s.t;
    out.x.push_back(x0);
    out.y.push_back(vbar);
    for (std::size_t n = 0; n < s.X.size(); ++n) {
        out.x.push_back(x0 - s.X[n]);
        out.y.push_back(vbar - s.Y[n]);
    }
    return out;
}

DifferenceState to_difference(const RelativeState& s) {
    check_relative_ordering(s);
    DifferenceState out;
    out.t = s.t;
    for (std::size_t n = 0; n < s.X.size(); ++n) {
        out.xi.push_back(n == 0 ? s.X[0] : s.X[n] - s.X[n - 1]);
        out.zeta.push_back(n == 0 ? s.Y[0] : s.Y[n] - s.Y[n - 1]);
    }
    return out;
}

RelativeState from_difference(const DifferenceState& s) {
    if (s.xi.size() != s.zeta.size() || s.xi.empty()) {
        throw ValidationError("difference state needs matching, nonempty xi/zeta vectors");
    }
    RelativeState out;
    out.t = s.t;
    double X = 0.0;
    double Y = 0.0;
    for (std::size_t n = 0; n < s.xi.size(); ++n) {
        X += s.xi[n];
        Y += s.zeta[n];
        out.X.push_back(X);
        out.Y.push_back(Y);
    }
    return out;
}

RelativeState relative_view(CoordinateSystem system, double t, std::span<const double> s) {
    const std::size_t half = s.size() / 2;
    RelativeState out;
    out.t = t;
    switch (system) {
    case CoordinateSystem::Absolute:
        for (std::size_t n = 1; n < half; ++n) {
            out.X.push_back(s[0] - s[n]);
            out.Y.push_back(s[half] - s[half + n]);
        }
        break;
    case CoordinateSystem::Relative:
        out.X.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(half));
        out.Y.assign(s.begin() + static_cast<std::ptrdiff_t>(half), s.end());
        break;
    case CoordinateSystem::Difference: {
        double X = 0.0;
        double Y = 0.0;
        for (std::size_t n = 0; n < half; ++n) {
            X += s[n];
            Y += s[half + n];
            out.X.push_back(X);
            out.Y.push_back(Y);
        }
        break;
    }
    }
    return out;
}

void validate_relative(const RelativeState& s, double vbar) {
    check_relative_ordering(s);
    for (std::size_t n = 0; n < s.Y.size(); ++n) {
        if (!(s.Y[n] > vbar - kMaxSpeed && s.Y[n] <= vbar)) {
            throw ValidationError("relative speed Y_" + std::to_string(n + 1) + " = " + fmt(s.Y[n]) +
                                  " outside the speed-limit interval (" + fmt(vbar - kMaxSpeed) + ", " +
                                  fmt(vbar) + "]");
        }
    }
}

} // namespace ovfl
