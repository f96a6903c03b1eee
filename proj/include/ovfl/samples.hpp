#pragma once

#include "ovfl/integrator.hpp"
#include "ovfl/model.hpp"

#include <span>
#include <vector>

namespace ovfl {

// One row of the exported time series: relative and difference coordinates of
// every follower plus the Hamiltonian of the first pair.
struct SampleRow {
    double t = 0.0;
    std::vector<double> X;
    std::vector<double> Y;
    std::vector<double> xi;
    std::vector<double> zeta;
    double H1 = 0.0;
};

// Time-ordered rows. All offline analysis runs on this view so that a
// trajectory re-read from CSV reproduces the inline results exactly.
struct SampleTable {
    int followers = 0;
    std::vector<SampleRow> rows;

    // The autonomous first pair (X_1, Y_1) as an N = 1 table.
    SampleTable first_pair() const;

    // Minimum over rows and pairs of xi_n.
    double min_gap() const;
};

SampleRow make_row(CoordinateSystem system, const ModelParams& p, double t, std::span<const double> state);

// Rows at every accepted step, `dense_per_step` equally spaced interior points
// of each step, and the given extra times (typically event times).
SampleTable tabulate(const Trajectory& traj, CoordinateSystem system, const ModelParams& p, int dense_per_step,
                     std::span<const double> extra_times = {});

// `count` rows equally spaced in time on [t0, t1] plus the extra times.
SampleTable tabulate_uniform(const Trajectory& traj, CoordinateSystem system, const ModelParams& p, double t0,
                             double t1, std::size_t count, std::span<const double> extra_times = {});

} // namespace ovfl
