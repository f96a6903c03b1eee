#include "ovfl/samples.hpp"

#include "ovfl/energy.hpp"
#include "ovfl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ovfl {

SampleRow make_row(CoordinateSystem system, const ModelParams& p, double t, std::span<const double> state) {
    SampleRow row;
    row.t = t;
    const RelativeState rel = relative_view(system, t, state);
    row.X = rel.X;
    row.Y = rel.Y;
    const std::size_t n = rel.X.size();
    if (system == CoordinateSystem::Difference) {
        row.xi.assign(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(n));
        row.zeta.assign(state.begin() + static_cast<std::ptrdiff_t>(n), state.end());
    } else {
        row.xi.resize(n);
        row.zeta.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            row.xi[i] = i == 0 ? rel.X[0] : rel.X[i] - rel.X[i - 1];
            row.zeta[i] = i == 0 ? rel.Y[0] : rel.Y[i] - rel.Y[i - 1];
        }
    }
    row.H1 = row.xi[0] > 0.0 ? hamiltonian(p, row.xi[0], row.zeta[0]) : std::numeric_limits<double>::quiet_NaN();
    return row;
}

SampleTable SampleTable::first_pair() const {
    SampleTable out;
    out.followers = 1;
    out.rows.reserve(rows.size());
    for (const auto& r : rows) {
        SampleRow q;
        q.t = r.t;
        q.X = {r.X[0]};
        q.Y = {r.Y[0]};
        q.xi = {r.xi[0]};
        q.zeta = {r.zeta[0]};
        q.H1 = r.H1;
        out.rows.push_back(std::move(q));
    }
    return out;
}

double SampleTable::min_gap() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        for (double g : r.xi) best = std::min(best, g);
    }
    return best;
}

namespace {

SampleTable build(const Trajectory& traj, CoordinateSystem system, const ModelParams& p, std::vector<double> times) {
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    SampleTable table;
    table.followers = followers_in(system, traj.dim());
    table.rows.reserve(times.size());
    for (double t : times) {
        const auto s = traj.at(t);
        table.rows.push_back(make_row(system, p, t, s));
    }
    return table;
}

} // namespace

SampleTable tabulate(const Trajectory& traj, CoordinateSystem system, const ModelParams& p, int dense_per_step,
                     std::span<const double> extra_times) {
    std::vector<double> times;
    const auto& ts = traj.times();
    times.reserve(ts.size() * static_cast<std::size_t>(1 + std::max(dense_per_step, 0)) + extra_times.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        times.push_back(ts[i]);
        if (i + 1 < ts.size()) {
            for (int k = 1; k <= dense_per_step; ++k) {
                times.push_back(ts[i] + (ts[i + 1] - ts[i]) * k / (dense_per_step + 1));
            }
        }
    }
    for (double t : extra_times) {
        if (t >= traj.t_begin() && t <= traj.t_end()) times.push_back(t);
    }
    return build(traj, system, p, std::move(times));
}

SampleTable tabulate_uniform(const Trajectory& traj, CoordinateSystem system, const ModelParams& p, double t0,
                             double t1, std::size_t count, std::span<const double> extra_times) {
    if (count < 2 || !(t1 > t0)) throw ValidationError("tabulate_uniform needs count >= 2 and t1 > t0");
    std::vector<double> times;
    times.reserve(count + extra_times.size());
    for (std::size_t i = 0; i < count; ++i) {
        times.push_back(i + 1 == count ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    for (double t : extra_times) {
        if (t >= t0 && t <= t1) times.push_back(t);
    }
    return build(traj, system, p, std::move(times));
}

} // namespace ovfl
