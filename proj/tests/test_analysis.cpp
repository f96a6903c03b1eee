#include "ovfl/analysis.hpp"
#include "ovfl/energy.hpp"
#include "ovfl/errors.hpp"
#include "ovfl/samples.hpp"
#include "ovfl/sweep.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

using namespace ovfl;

TEST_SUITE_BEGIN("analysis");

namespace {

const ModelParams kFig5{2.0, 1.0, 0.8, 2};

SampleTable single_pair(const ModelParams& p, double x, double y, double t_end = 60.0) {
    IntegratorConfig c;
    c.t_end = t_end;
    const std::vector<double> y0{x, y};
    const auto traj = integrate(platoon_system(CoordinateSystem::Relative, p), y0, 0.0, c);
    return tabulate(traj, CoordinateSystem::Relative, p, 4);
}

const MonitorReport& find(const std::vector<MonitorReport>& ms, const std::string& name) {
    for (const auto& m : ms) {
        if (m.name == name) return m;
    }
    FAIL("no monitor named " << name);
    return ms.front();
}

} // namespace

TEST_CASE("region classification") {
    const double xi = kFig5.x_infinity();
    CHECK(classify_region(0.5, 0.1, xi) == RegionLabel::U1);
    CHECK(classify_region(0.5, -0.1, xi) == RegionLabel::L1);
    CHECK(classify_region(3.0, 0.1, xi) == RegionLabel::U2);
    CHECK(classify_region(3.0, -0.1, xi) == RegionLabel::L2);
    CHECK(classify_region(3.0, 0.0, xi) == RegionLabel::AxisX);
    CHECK(classify_region(xi, 0.3, xi) == RegionLabel::AxisY);
    CHECK(classify_region(xi, 0.0, xi) == RegionLabel::Equilibrium);
    CHECK(to_string(RegionLabel::L2) == "L2");
}

TEST_CASE("region lemmas hold from random starts") {
    std::mt19937_64 rng(2024);
    const double xi = kFig5.x_infinity();
    const double y_lo = kFig5.vbar - kMaxSpeed;
    struct Region {
        RegionLabel label;
        double x_lo, x_hi, y_lo, y_hi;
    };
    const Region regions[] = {{RegionLabel::U1, 0.2, xi, 0.0, kFig5.vbar},
                              {RegionLabel::L1, 0.2, xi, y_lo, 0.0},
                              {RegionLabel::U2, xi, xi + 3.0, 0.0, kFig5.vbar},
                              {RegionLabel::L2, xi, xi + 3.0, y_lo, 0.0}};
    for (const auto& reg : regions) {
        std::uniform_real_distribution<double> ux(reg.x_lo, reg.x_hi), uy(reg.y_lo, reg.y_hi);
        for (int i = 0; i < 10; ++i) {
            const double x = ux(rng);
            const double y = uy(rng);
            if (y == 0.0 || y == y_lo || x == xi) continue;
            REQUIRE(classify_region(x, y, xi) == reg.label);
            const auto ms = verify_region_lemmas(single_pair(kFig5, x, y), kFig5);
            REQUIRE(ms.size() == 1);
            INFO(to_string(reg.label) << " start (" << x << ", " << y << ") -> " << ms[0].name << " worst "
                                      << ms[0].worst_violation);
            CHECK(ms[0].passed);
            CHECK(ms[0].name.find(std::string(to_string(reg.label))) != std::string::npos);
        }
    }
}

TEST_CASE("region lemma needs a single pair") {
    SampleTable t;
    t.followers = 2;
    t.rows.push_back(SampleRow{0.0, {1.0, 2.0}, {0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}, 0.0});
    CHECK_THROWS_AS(verify_region_lemmas(t, kFig5), ValidationError);
    CHECK_NOTHROW(verify_region_lemmas(t.first_pair(), kFig5));
}

TEST_CASE("energy and bounds on fig5") {
    const auto table = single_pair(kFig5, 0.5, -0.7, 200.0);
    const auto budget = energy_budget(kFig5, 0.5, -0.7);
    const auto ms = verify_energy_and_bounds(table, kFig5, budget);
    for (const auto& m : ms) {
        INFO(m.name << " worst " << m.worst_violation);
        CHECK(m.passed);
    }
    CHECK(find(ms, "energy_monotone").passed);
    CHECK(find(ms, "speed_bound_y_bar").passed);
    CHECK(find(ms, "gap_upper_bound_x_bar").passed);
    CHECK(find(ms, "gap_lower_bound").passed);
    CHECK(find(ms, "gap_lower_bound_delta_1").passed);
    CHECK(verify_speed_limits(table, kFig5).passed);
    CHECK(verify_min_gap(table).passed);
}

TEST_CASE("energy monitor catches an energy increase") {
    auto table = single_pair(kFig5, 0.5, -0.7, 20.0);
    const auto budget = energy_budget(kFig5, 0.5, -0.7);
    // Late in the run, where the true decrease between rows is far below the bump.
    auto& r = table.rows[table.rows.size() - 5];
    r.H1 += 1e-3;
    const auto ms = verify_energy_and_bounds(table, kFig5, budget);
    const auto& m = find(ms, "energy_monotone");
    CHECK_FALSE(m.passed);
    CHECK(m.worst_violation > 9e-4);
    CHECK(m.time == r.t);
}

TEST_CASE("speed and gap monitors flag violations") {
    auto table = single_pair(kFig5, 0.5, -0.7, 10.0);
    table.rows[3].Y[0] = kFig5.vbar + 1e-3;
    CHECK_FALSE(verify_speed_limits(table, kFig5).passed);
    table.rows[5].xi[0] = -0.1;
    const auto m = verify_min_gap(table);
    CHECK_FALSE(m.passed);
    CHECK(m.time == table.rows[5].t);
}

TEST_CASE("convergence diagnostics") {
    const auto table = single_pair(kFig5, 0.5, -0.7, 200.0);
    const auto budget = energy_budget(kFig5, 0.5, -0.7);
    const auto rep = convergence_diagnostics(table, kFig5, budget, 0.1);
    CHECK(rep.entered_ball);
    REQUIRE(rep.entry_time);
    CHECK(*rep.entry_time > 0.0);
    REQUIRE(rep.fitted_rate);
    CHECK(*rep.fitted_rate > 0.0);
    REQUIRE(rep.envelope_rate);
    CHECK(rep.gronwall_rate == budget.gronwall_rate);
    CHECK(rep.samples_after_entry >= 10);

    SUBCASE("too few rows after entry") {
        SampleTable short_table;
        short_table.followers = 1;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            short_table.rows.push_back(table.rows[i]);
            if (std::hypot(table.rows[i].X[0] - kFig5.x_infinity(), table.rows[i].Y[0]) < 0.1) break;
        }
        CHECK_THROWS_AS(convergence_diagnostics(short_table, kFig5, budget, 0.1), InsufficientDataError);
    }
    SUBCASE("no entry") {
        const auto far = convergence_diagnostics(table, kFig5, budget, 1e-300);
        CHECK_FALSE(far.entered_ball);
        CHECK_FALSE(far.entry_time);
    }
}

TEST_CASE("overdamped and underdamped cells") {
    const ModelParams over{3.0, 2.0, 1.3, 2};
    const ModelParams under{1.0, 1.0, 1.3, 2};
    const auto a = single_pair(over, 0.5, 1.0);
    const auto b = single_pair(under, 0.5, 1.0);
    CHECK(count_y1_sign_changes(a) <= 1);
    CHECK(count_y1_sign_changes(b) >= 3);
}

TEST_CASE("equilibrium sampler keeps the equilibrium gap") {
    ModelParams p{2.0, 1.0, 0.8, 4};
    IntegratorConfig c;
    c.t_end = 50.0;
    const auto rep = no_collision_sweep(equilibrium_sampler(p), 3, 7, c);
    CHECK(rep.completed == 3);
    CHECK(rep.collision_events == 0);
    CHECK(std::fabs(rep.min_gap - p.x_infinity()) < 1e-12);
}

TEST_CASE("inadmissible draws are rejected") {
    SweepDraw d;
    d.params = ModelParams{2.0, 1.0, 0.8, 3};
    d.initial.xi = {1.0, 0.0};
    d.initial.zeta = {0.0, 0.0};
    try {
        validate_draw(d);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("gap xi_2 must be positive") != std::string::npos);
    }
    const auto rep = no_collision_sweep([d](std::uint64_t) { return d; }, 2, 0, IntegratorConfig{});
    CHECK(rep.rejected == 2);
    CHECK(rep.completed == 0);
    CHECK(rep.runs[0].status == "rejected");

    d.initial.xi = {1.0, 1.0};
    d.initial.zeta = {0.0, 3.0};  // Y_2 = 3 > vbar
    CHECK_THROWS_AS(validate_draw(d), ValidationError);
}

TEST_CASE("random sweep is deterministic and collision free") {
    IntegratorConfig c;
    c.t_end = 30.0;
    const auto sampler = random_admissible_sampler(SamplerRanges{});
    const auto a = no_collision_sweep(sampler, 8, 99, c);
    const auto b = no_collision_sweep(sampler, 8, 99, c);
    CHECK(a.collision_events == 0);
    CHECK(a.failures == 0);
    CHECK(a.completed + a.rejected == 8);
    CHECK(a.min_gap > 0.0);
    CHECK(a.min_gap == b.min_gap);
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].seed == 99 + i);
        CHECK(a.runs[i].min_gap == b.runs[i].min_gap);
    }
}

TEST_SUITE_END();
