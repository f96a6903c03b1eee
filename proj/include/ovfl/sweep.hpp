#pragma once

#include "ovfl/integrator.hpp"
#include "ovfl/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ovfl {

// One draw of parameters and difference-coordinate initial data.
struct SweepDraw {
    ModelParams params;
    DifferenceState initial;
};

// Deterministic in its seed.
using InitialSampler = std::function<SweepDraw(std::uint64_t seed)>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct SamplerRanges {
    Interval alpha{1.0, 5.0};
    Interval beta{0.5, 5.0};
    Interval vbar{0.5, 1.5};
    int n_min = 2;  // followers
    int n_max = 3;
    Interval gap_fraction{0.02, 2.0};  // of X_inf
};

// Uniform draws; relative speeds uniform in (vbar - V(inf), vbar].
InitialSampler random_admissible_sampler(SamplerRanges ranges);

// Every gap at X_inf, every relative speed 0.
InitialSampler equilibrium_sampler(ModelParams p);

// Throws ValidationError naming the first violated invariant.
void validate_draw(const SweepDraw& draw);

struct SweepRun {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::string status;  // ok | rejected | collision | stiffness | error
    std::string message;
    ModelParams params;
    double min_gap = 0.0;
    bool collision = false;
};

struct NoCollisionReport {
    std::size_t count = 0;
    std::size_t completed = 0;
    std::size_t rejected = 0;
    std::size_t collision_events = 0;
    std::size_t failures = 0;
    double min_gap = 0.0;  // over completed runs
    std::vector<SweepRun> runs;
};

// Draw i uses seed + i. Inadmissible draws are rejected before integrating.
// Minimum gaps are taken over accepted steps plus `dense_per_step` interior
// points of each step.
NoCollisionReport no_collision_sweep(const InitialSampler& sampler, std::size_t count, std::uint64_t seed,
                                     const IntegratorConfig& cfg, int dense_per_step = 4);

// OVFL_NUM_WORKERS if set and positive, else hardware concurrency (at least 1).
unsigned worker_count();

// Runs job(i) for i in [0, n) on at most worker_count() threads. Jobs must
// write only to their own slot; the first exception is rethrown after joining.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& job);

} // namespace ovfl
