#include "ovfl/errors.hpp"
#include "ovfl/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ovfl;

TEST_SUITE_BEGIN("model");

namespace {

// 40-digit mpmath reference values.
constexpr double kV2 = 0.964027580075816884;
constexpr double kXinf08 = 1.83447714989265025;
constexpr double kXinf13 = 2.34954551262079689;

RelativeState random_relative(std::mt19937_64& rng, int followers, double vbar) {
    std::uniform_real_distribution<double> gap(0.05, 4.0);
    std::uniform_real_distribution<double> speed(vbar - kMaxSpeed + 1e-6, vbar);
    RelativeState s;
    double X = 0.0;
    for (int n = 0; n < followers; ++n) {
        X += gap(rng);
        s.X.push_back(X);
        s.Y.push_back(speed(rng));
    }
    return s;
}

} // namespace

TEST_CASE("optimal velocity curve") {
    CHECK(ov_value(0.0) == 0.0);
    CHECK(ov_value(2.0) == doctest::Approx(kV2).epsilon(1e-15));
    CHECK(std::fabs(ov_value(1e6) - kMaxSpeed) < 1e-12);
    CHECK(ov_slope(2.0) == 1.0);

    double prev = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double x = 12.0 * i / 10000.0;
        const double v = ov_value(x);
        CHECK_MESSAGE(v > prev, "not increasing at x = " << x);
        CHECK(v < 1.9641);
        prev = v;
    }
}

TEST_CASE("ov_inverse") {
    CHECK(ov_inverse(0.8) == doctest::Approx(kXinf08).epsilon(1e-14));
    CHECK(ov_inverse(1.3) == doctest::Approx(kXinf13).epsilon(1e-14));
    CHECK(std::fabs(ov_inverse(0.96402758) - 2.0) < 1e-9);
    CHECK(std::fabs(ov_value(ov_inverse(0.8)) - 0.8) < 1e-12);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 6.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        CHECK(ov_inverse(ov_value(x)) == doctest::Approx(x).epsilon(1e-9));
    }
    CHECK_THROWS_AS(ov_inverse(0.0), DomainError);
    CHECK_THROWS_AS(ov_inverse(kMaxSpeed), DomainError);
    CHECK_THROWS_AS(ov_inverse(-0.3), DomainError);
}

TEST_CASE("params validation") {
    CHECK_NOTHROW(ModelParams{2.0, 1.0, 0.8, 3}.validate());
    CHECK_THROWS_AS(ModelParams({0.0, 1.0, 0.8, 2}).validate(), ValidationError);
    CHECK_THROWS_AS(ModelParams({1.0, -1.0, 0.8, 2}).validate(), ValidationError);
    CHECK_THROWS_AS(ModelParams({1.0, 1.0, 2.0, 2}).validate(), ValidationError);
    CHECK_THROWS_AS(ModelParams({1.0, 1.0, 0.8, 1}).validate(), ValidationError);
}

TEST_CASE("absolute field") {
    ModelParams p{2.0, 1.0, 0.8, 2};
    PlatoonState s{0.0, {2.0, 0.0}, {1.0, 0.5}};
    const auto d = vf_absolute(p, s);
    CHECK(d.x[0] == 1.0);
    CHECK(d.x[1] == 0.5);
    CHECK(d.y[0] == 0.0);
    CHECK(d.y[1] == doctest::Approx(1.05305516015163377).epsilon(1e-14));

    PlatoonState bad{0.0, {1.0, 1.0}, {0.8, 0.8}};
    CHECK_THROWS_AS(vf_absolute(p, bad), SingularityError);
    try {
        vf_absolute(p, bad);
    } catch (const SingularityError& e) {
        CHECK(e.index() == 1);
        CHECK(e.gap() == 0.0);
    }
}

TEST_CASE("relative field") {
    ModelParams p{2.0, 1.0, 0.8, 2};
    const double x_inf = p.x_infinity();
    auto d = vf_relative(p, {0.0, {x_inf}, {0.0}});
    CHECK(d.X[0] == 0.0);
    CHECK(std::fabs(d.Y[0]) < 1e-15);

    d = vf_relative(p, {0.0, {x_inf}, {0.1}});
    CHECK(d.X[0] == 0.1);
    CHECK(d.Y[0] == doctest::Approx(-0.229714976205285138).epsilon(1e-13));
    CHECK_THROWS_AS(vf_relative(p, {0.0, {1.0, 0.5}, {0.0, 0.0}}), SingularityError);
}

TEST_CASE("difference field") {
    ModelParams p{2.0, 1.0, 0.8, 3};
    const auto d = vf_difference(p, {0.0, {1.0, 0.5}, {0.2, -0.1}});
    CHECK(d.xi[0] == 0.2);
    CHECK(d.xi[1] == -0.1);
    CHECK(d.zeta[1] == doctest::Approx(1.08710819537820310).epsilon(1e-14));
    CHECK_THROWS_AS(vf_difference(p, {0.0, {1.0, 0.0}, {0.0, 0.0}}), SingularityError);
}

TEST_CASE("equilibrium is a fixed point of all three fields") {
    for (int n : {2, 3, 5}) {
        ModelParams p{2.0, 1.0, 0.8, n};
        const auto eq = equilibrium(p);
        CHECK(std::fabs(ov_value(eq.x_infinity) - p.vbar) < 1e-12);
        for (int k = 0; k < p.followers(); ++k) {
            CHECK(eq.states.X[static_cast<std::size_t>(k)] == doctest::Approx((k + 1) * eq.x_infinity));
        }
        const auto r = vf_relative(p, eq.states);
        const auto d = vf_difference(p, to_difference(eq.states));
        const auto a = vf_absolute(p, to_absolute(eq.states, 100.0, p.vbar));
        for (std::size_t k = 0; k < r.X.size(); ++k) {
            CHECK(std::fabs(r.Y[k]) < 1e-15);
            CHECK(std::fabs(d.zeta[k]) < 1e-15);
            // Absolute positions near 100 round the gaps at ~1e-14.
            CHECK(std::fabs(a.y[k + 1]) < 1e-14);
            CHECK(a.x[k + 1] == p.vbar);
        }
    }
    ModelParams p{1.0, 1.0, 0.8, 4};
    const auto eq = equilibrium(p);
    CHECK(eq.states.X[2] == doctest::Approx(5.5034).epsilon(1e-3));
    CHECK_THROWS(equilibrium(ModelParams{1.0, 1.0, 2.5, 2}));
}

TEST_CASE("the three fields agree under the coordinate changes") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> a(0.2, 5.0), b(0.2, 5.0), v(0.3, 1.6);
    std::uniform_int_distribution<int> nf(1, 4);
    // Mismatch relative to max(1, |value|): close gaps make the fields large,
    // and differencing two of them cancels digits in the reference itself.
    double worst = 0.0;
    auto offer = [&](double x, double ref) {
        worst = std::max(worst, std::fabs(x - ref) / std::max({1.0, std::fabs(x), std::fabs(ref)}));
    };
    for (int i = 0; i < 1000; ++i) {
        const int followers = nf(rng);
        ModelParams p{a(rng), b(rng), v(rng), followers + 1};
        const RelativeState rel = random_relative(rng, followers, p.vbar);
        const auto dr = vf_relative(p, rel);

        const auto abs = to_absolute(rel, 3.0, p.vbar);
        const auto da = vf_absolute(p, abs);
        const auto dd = vf_difference(p, to_difference(rel));
        for (int n = 0; n < followers; ++n) {
            const auto k = static_cast<std::size_t>(n);
            // X_n = x_0 - x_n, Y_n = vbar - y_n
            offer(da.x[0] - da.x[k + 1], dr.X[k]);
            offer(da.y[0] - da.y[k + 1], dr.Y[k]);
            offer(dd.xi[k], n == 0 ? dr.X[0] : dr.X[k] - dr.X[k - 1]);
            offer(dd.zeta[k], n == 0 ? dr.Y[0] : dr.Y[k] - dr.Y[k - 1]);
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("coordinate transforms") {
    PlatoonState s{0.0, {10.0, 8.0, 7.0}, {0.8, 0.5, 1.0}};
    const auto rel = to_relative(s, 0.8);
    CHECK(rel.X == std::vector<double>{2.0, 3.0});
    CHECK(rel.Y[0] == doctest::Approx(0.3));
    CHECK(rel.Y[1] == doctest::Approx(-0.2));
    const auto d = to_difference(RelativeState{0.0, {2.0, 3.0}, {0.0, 0.0}});
    CHECK(d.xi == std::vector<double>{2.0, 1.0});

    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto r = random_relative(rng, 3, 0.8);
        const auto back = to_relative(to_absolute(r, 12.5, 0.8), 0.8);
        const auto back2 = from_difference(to_difference(r));
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(std::fabs(back.X[k] - r.X[k]) < 1e-14 * (1.0 + std::fabs(r.X[k]) + 12.5));
            CHECK(std::fabs(back.Y[k] - r.Y[k]) < 1e-14 * 4.0);
            CHECK(std::fabs(back2.X[k] - r.X[k]) < 1e-14 * (1.0 + r.X[k]));
        }
    }
    PlatoonState crossed{0.0, {1.0, 2.0}, {0.8, 0.8}};
    CHECK_THROWS_AS(to_relative(crossed, 0.8), ValidationError);
}

TEST_CASE("relative state validation") {
    CHECK_NOTHROW(validate_relative({0.0, {1.0, 2.0}, {0.8, -1.1}}, 0.8));
    CHECK_THROWS_AS(validate_relative({0.0, {1.0, 2.0}, {0.81, 0.0}}, 0.8), ValidationError);
    CHECK_THROWS_AS(validate_relative({0.0, {1.0, 2.0}, {0.0, 0.8 - kMaxSpeed}}, 0.8), ValidationError);
    CHECK_THROWS_AS(validate_relative({0.0, {1.0, 0.9}, {0.0, 0.0}}, 0.8), ValidationError);
}

TEST_SUITE_END();
