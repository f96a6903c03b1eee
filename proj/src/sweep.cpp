#include "ovfl/sweep.hpp"

#include "ovfl/errors.hpp"
#include "ovfl/samples.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace ovfl {

namespace {

double uniform(std::mt19937_64& rng, Interval r) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return r.lo + (r.hi - r.lo) * u(rng);
}

// (lo, hi]
double uniform_left_open(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return hi - (hi - lo) * u(rng);
}

} // namespace

InitialSampler random_admissible_sampler(SamplerRanges ranges) {
    return [ranges](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        SweepDraw d;
        d.params.alpha = uniform(rng, ranges.alpha);
        d.params.beta = uniform(rng, ranges.beta);
        d.params.vbar = uniform(rng, ranges.vbar);
        std::uniform_int_distribution<int> n(ranges.n_min, ranges.n_max);
        const int followers = n(rng);
        d.params.n_vehicles = followers + 1;
        const double x_inf = d.params.x_infinity();
        std::vector<double> Y(static_cast<std::size_t>(followers));
        for (int i = 0; i < followers; ++i) {
            d.initial.xi.push_back(x_inf * uniform(rng, ranges.gap_fraction));
            Y[static_cast<std::size_t>(i)] = uniform_left_open(rng, d.params.vbar - kMaxSpeed, d.params.vbar);
        }
        for (int i = 0; i < followers; ++i) {
            const auto k = static_cast<std::size_t>(i);
            d.initial.zeta.push_back(i == 0 ? Y[0] : Y[k] - Y[k - 1]);
        }
        return d;
    };
}

InitialSampler equilibrium_sampler(ModelParams p) {
    return [p](std::uint64_t) {
        SweepDraw d;
        d.params = p;
        const double x_inf = p.x_infinity();
        d.initial.xi.assign(static_cast<std::size_t>(p.followers()), x_inf);
        d.initial.zeta.assign(static_cast<std::size_t>(p.followers()), 0.0);
        return d;
    };
}

void validate_draw(const SweepDraw& draw) {
    draw.params.validate();
    const auto& s = draw.initial;
    if (s.xi.size() != static_cast<std::size_t>(draw.params.followers()) || s.zeta.size() != s.xi.size()) {
        throw ValidationError("initial data must have one (xi, zeta) pair per follower");
    }
    for (std::size_t n = 0; n < s.xi.size(); ++n) {
        if (!(s.xi[n] > 0.0)) {
            throw ValidationError("gap xi_" + std::to_string(n + 1) + " must be positive, got " +
                                  std::to_string(s.xi[n]));
        }
    }
    validate_relative(from_difference(s), draw.params.vbar);
}

NoCollisionReport no_collision_sweep(const InitialSampler& sampler, std::size_t count, std::uint64_t seed,
                                     const IntegratorConfig& cfg, int dense_per_step) {
    cfg.validate();
    NoCollisionReport report;
    report.count = count;
    report.runs.resize(count);

    parallel_for(count, [&](std::size_t i) {
        SweepRun& run = report.runs[i];
        run.index = i;
        run.seed = seed + i;
        const SweepDraw draw = sampler(run.seed);
        run.params = draw.params;
        try {
            validate_draw(draw);
        } catch (const ValidationError& e) {
            run.status = "rejected";
            run.message = e.what();
            return;
        }
        try {
            const auto system = platoon_system(CoordinateSystem::Difference, draw.params);
            const auto y0 = flatten(draw.initial);
            const Trajectory traj = integrate(system, y0, 0.0, cfg);
            const SampleTable table = tabulate(traj, CoordinateSystem::Difference, draw.params, dense_per_step);
            run.min_gap = table.min_gap();
            run.collision = traj.collided();
            run.status = run.collision ? "collision" : "ok";
        } catch (const StiffnessError& e) {
            run.status = "stiffness";
            run.message = e.what();
        } catch (const std::exception& e) {
            run.status = "error";
            run.message = e.what();
        }
    });

    report.min_gap = std::numeric_limits<double>::infinity();
    for (const auto& run : report.runs) {
        if (run.status == "rejected") {
            ++report.rejected;
            continue;
        }
        if (run.status == "ok" || run.status == "collision") {
            ++report.completed;
            report.min_gap = std::min(report.min_gap, run.min_gap);
        } else {
            ++report.failures;
        }
        if (run.collision) ++report.collision_events;
    }
    return report;
}

unsigned worker_count() {
    if (const char* env = std::getenv("OVFL_NUM_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& job) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace ovfl
