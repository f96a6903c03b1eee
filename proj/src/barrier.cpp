#include "ovfl/barrier.hpp"

#include "ovfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ovfl {

double barrier_R(double u, double delta_2, double beta, double zeta_check) {
    if (!(u >= zeta_check && u < 0.0)) {
        throw DomainError("barrier_R: u = " + std::to_string(u) + " outside [" + std::to_string(zeta_check) +
                          ", 0)");
    }
    return 1.0 / (2.0 / delta_2 + (u - zeta_check) / beta);
}

double barrier_lower_bound(double delta_2, double beta, double zeta_check) {
    if (!(delta_2 > 0.0) || !(beta > 0.0)) {
        throw DomainError("barrier_lower_bound: delta_2 and beta must be positive");
    }
    return 1.0 / (2.0 / delta_2 + std::fabs(zeta_check) / beta);
}

double g_denominator(double zeta, double psi, double zeta1, double xi1, const ModelParams& p) {
    if (!(psi > 0.0) || !(xi1 > 0.0)) {
        throw DomainError("g_field: gaps must be positive");
    }
    return p.alpha * (ov_value(psi) - ov_value(xi1)) + p.alpha * zeta +
           p.beta * (zeta / (psi * psi) - zeta1 / (xi1 * xi1));
}

double g_field(double zeta, double psi, double zeta1, double xi1, const ModelParams& p) {
    const double den = g_denominator(zeta, psi, zeta1, xi1, p);
    if (den == 0.0) {
        throw SingularQuotientError("g_field: denominator vanishes (zeta_2 is stationary)");
    }
    return -zeta / den;
}

std::optional<BarrierSegment> extract_barrier_segment(const SampleTable& table, const EnergyBudget& budget,
                                                      const ModelParams& p) {
    if (table.followers != 2) {
        throw ValidationError("barrier extraction needs the three-vehicle difference dynamics (N = 2), got N = " +
                              std::to_string(table.followers));
    }
    const auto& rows = table.rows;
    if (rows.size() < 2) return std::nullopt;

    EnergyBudget b = budget;
    if (b.delta_1_source != Delta1Source::Energy) {
        double observed = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) observed = std::min(observed, r.xi[0]);
        b = refine_delta1(p, b, observed);
    }

    BarrierSegment seg;
    seg.delta_1 = *b.delta_1;
    seg.delta_1_source = b.delta_1_source;
    seg.delta_2 = std::min(rows[0].xi[1], seg.delta_1);
    const double half = 0.5 * seg.delta_2;

    std::size_t i = 1;
    for (; i < rows.size(); ++i) {
        if (rows[i - 1].xi[1] > half && rows[i].xi[1] <= half) break;
    }
    if (i == rows.size()) return std::nullopt;

    BarrierSample first;
    std::size_t next = i;
    if (std::fabs(rows[i].xi[1] - half) <= 1e-9 * std::max(1.0, half)) {
        const auto& r = rows[i];
        first = {r.t, r.zeta[1], half, r.xi[0], r.zeta[0]};
        next = i + 1;
    } else {
        const auto& a = rows[i - 1];
        const auto& c = rows[i];
        const double w = (a.xi[1] - half) / (a.xi[1] - c.xi[1]);
        auto lerp = [w](double u, double v) { return u + w * (v - u); };
        first = {lerp(a.t, c.t), lerp(a.zeta[1], c.zeta[1]), half, lerp(a.xi[0], c.xi[0]),
                 lerp(a.zeta[0], c.zeta[0])};
    }
    if (!(first.zeta < 0.0)) return std::nullopt;

    seg.t_check = first.t;
    seg.zeta_check = first.zeta;
    seg.samples.push_back(first);
    for (std::size_t k = next; k < rows.size(); ++k) {
        const auto& r = rows[k];
        if (!(r.zeta[1] < 0.0) || r.xi[1] > half) break;
        const double last = seg.samples.back().zeta;
        if (r.zeta[1] < last - 1e-9) {
            throw MonotonicityViolation(r.t, last - r.zeta[1]);
        }
        if (r.zeta[1] <= last) continue;
        seg.samples.push_back({r.t, r.zeta[1], r.xi[1], r.xi[0], r.zeta[0]});
    }
    seg.mu_plus = seg.samples.back().zeta;
    seg.t_exit = seg.samples.back().t;
    seg.barrier_bound = barrier_lower_bound(seg.delta_2, p.beta, seg.zeta_check);
    const double signed_den = 2.0 / seg.delta_2 + seg.zeta_check / p.beta;
    if (signed_den > 0.0) seg.barrier_bound_signed = 1.0 / signed_den;
    return seg;
}

namespace {

MonitorReport segment_report(std::string name, double worst, const BarrierSample* at, double tol) {
    MonitorReport m;
    m.name = std::move(name);
    m.tolerance = tol;
    if (at) {
        m.worst_violation = worst;
        m.time = at->t;
        m.state = {at->xi1, at->xi1 + at->psi, at->zeta1, at->zeta1 + at->zeta};
    }
    m.passed = m.worst_violation <= tol;
    return m;
}

} // namespace

MonitorReport verify_barrier(const BarrierSegment& seg, double beta) {
    double worst = -std::numeric_limits<double>::infinity();
    const BarrierSample* at = nullptr;
    double min_psi = std::numeric_limits<double>::infinity();
    double min_margin = std::numeric_limits<double>::infinity();
    double max_lambda = 0.0;
    for (const auto& s : seg.samples) {
        const double r = barrier_R(s.zeta, seg.delta_2, beta, seg.zeta_check);
        const double v = r - s.psi;
        if (v > worst) {
            worst = v;
            at = &s;
        }
        min_margin = std::min(min_margin, s.psi - r);
        max_lambda = std::max(max_lambda, 1.0 / s.psi - 1.0 / r);
        min_psi = std::min(min_psi, s.psi);
    }
    const double floor = barrier_lower_bound(seg.delta_2, beta, seg.zeta_check);
    for (const auto& s : seg.samples) {
        if (s.psi == min_psi && floor - s.psi > worst) {
            worst = floor - s.psi;
            at = &s;
        }
    }
    auto m = segment_report("barrier_psi_above_R", worst, at, 1e-6);
    m.details["min_margin"] = min_margin;
    m.details["min_psi"] = min_psi;
    m.details["lower_bound"] = floor;
    m.details["max_lambda"] = max_lambda;
    m.details["samples"] = static_cast<double>(seg.samples.size());
    if (seg.barrier_bound_signed) m.details["lower_bound_signed"] = *seg.barrier_bound_signed;
    return m;
}

MonitorReport verify_zeta2_increasing(const BarrierSegment& seg, const ModelParams& p) {
    double worst = -std::numeric_limits<double>::infinity();
    const BarrierSample* at = nullptr;
    for (const auto& s : seg.samples) {
        const double rate = -g_denominator(s.zeta, s.psi, s.zeta1, s.xi1, p);
        if (-rate > worst) {
            worst = -rate;
            at = &s;
        }
    }
    return segment_report("zeta2_increasing", worst, at, 1e-9);
}

MonitorReport verify_zeta2_positive_invariance(const SampleTable& table, double delta_2, double t_check) {
    const double half = 0.5 * delta_2;
    MonitorReport m;
    m.name = "zeta2_positive_invariance";
    m.tolerance = 1e-8;
    double worst = -std::numeric_limits<double>::infinity();
    const SampleRow* at = nullptr;
    bool inside = false;
    bool positive_seen = false;
    for (const auto& r : table.rows) {
        if (r.t < t_check) continue;
        if (r.xi[1] < half) {
            if (!inside) positive_seen = false;
            inside = true;
            if (positive_seen && -r.zeta[1] > worst) {
                worst = -r.zeta[1];
                at = &r;
            }
            if (r.zeta[1] > 0.0) positive_seen = true;
        } else {
            inside = false;
        }
    }
    if (at) {
        m.worst_violation = worst;
        m.time = at->t;
        m.state = at->X;
        m.state.insert(m.state.end(), at->Y.begin(), at->Y.end());
    } else {
        m.details["vacuous"] = 1.0;
    }
    m.passed = m.worst_violation <= m.tolerance;
    return m;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw ValidationError("MonotoneCubic needs at least two matching nodes");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) throw ValidationError("MonotoneCubic nodes must be strictly increasing");
    }
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    if (n == 2) {
        d_[0] = d_[1] = delta[0];
        return;
    }
    // Three-point slopes, clipped by Hyman's filter. Unlike the harmonic-mean
    // slopes this stays accurate where the slope itself tends to zero.
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) continue;
        const double est = (h[k] * delta[k - 1] + h[k - 1] * delta[k]) / (h[k - 1] + h[k]);
        const double sign = delta[k] > 0.0 ? 1.0 : -1.0;
        const double cap = 3.0 * std::min(std::fabs(delta[k - 1]), std::fabs(delta[k]));
        d_[k] = sign * std::min(std::max(0.0, sign * est), cap);
    }
    // Non-centred three-point end slopes, limited to preserve shape.
    auto edge = [](double h0, double h1, double m0, double m1) {
        double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if (d * m0 <= 0.0) {
            d = 0.0;
        } else if (m0 * m1 <= 0.0 && std::fabs(d) > std::fabs(3.0 * m0)) {
            d = 3.0 * m0;
        }
        return d;
    };
    d_[0] = edge(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

std::size_t MonotoneCubic::interval(double x) const {
    if (!(x >= x_.front() && x <= x_.back())) {
        throw RangeError("MonotoneCubic: abscissa outside the interpolation range");
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = static_cast<std::size_t>(it - x_.begin());
    return std::min(k == 0 ? 0 : k - 1, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
    const std::size_t k = interval(x);
    const double h = x_[k + 1] - x_[k];
    const double s = (x - x_[k]) / h;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
}

double MonotoneCubic::derivative(double x) const {
    const std::size_t k = interval(x);
    const double h = x_[k + 1] - x_[k];
    const double s = (x - x_[k]) / h;
    const double dh00 = 6.0 * s * s - 6.0 * s;
    const double dh10 = 3.0 * s * s - 4.0 * s + 1.0;
    const double dh01 = -dh00;
    const double dh11 = 3.0 * s * s - 2.0 * s;
    return (dh00 * y_[k] + dh01 * y_[k + 1]) / h + dh10 * d_[k] + dh11 * d_[k + 1];
}

PsiDerivativeCheck check_psi_derivative(const BarrierSegment& seg, const ModelParams& p, std::size_t trim) {
    PsiDerivativeCheck out;
    const auto& s = seg.samples;
    if (s.size() < 2 * trim + 3) return out;
    std::vector<double> z, psi;
    for (const auto& q : s) {
        z.push_back(q.zeta);
        psi.push_back(q.psi);
    }
    const MonotoneCubic interp(z, psi);
    for (std::size_t i = std::max<std::size_t>(trim, 1); i + std::max<std::size_t>(trim, 1) < s.size(); ++i) {
        const double h = 0.25 * std::min(z[i] - z[i - 1], z[i + 1] - z[i]);
        const double fd = (interp(z[i] + h) - interp(z[i] - h)) / (2.0 * h);
        const double g = g_field(s[i].zeta, s[i].psi, s[i].zeta1, s[i].xi1, p);
        const double rel = std::fabs(fd - g) / std::fabs(g);
        if (rel > out.max_relative_error) {
            out.max_relative_error = rel;
            out.worst_zeta = z[i];
        }
        ++out.checked;
    }
    return out;
}

} // namespace ovfl
