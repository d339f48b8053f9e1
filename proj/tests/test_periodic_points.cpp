#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "lyapchi/periodic_points.hpp"
#include "oracle_helpers.hpp"

using namespace lyapchi;

namespace {

const CircleMap& linear2() {
    static const CircleMap map = CircleMap::linear(2);
    return map;
}
const CircleMap& trig01() {
    static const CircleMap map = CircleMap::trig_doubling(0.01);
    return map;
}
const CircleMap& bla01() {
    static const CircleMap map = CircleMap::blaschke(0.1);
    return map;
}

// Nearest record by circle distance; fine at test sizes.
double nearest_exponent(const std::vector<PeriodicPointRecord>& recs, double x) {
    double best = recs.front().exponent;
    double dist = 2.0;
    for (const PeriodicPointRecord& rec : recs) {
        double d = std::fabs(rec.point - x);
        d = std::min(d, 1.0 - d);
        if (d < dist) {
            dist = d;
            best = rec.exponent;
        }
    }
    return best;
}

} // namespace

TEST_CASE("enumeration matches the brute-force grid oracle") {
    for (const CircleMap& map : {trig01(), bla01()}) {
        for (int n = 1; n <= 8; ++n) {
            const auto records = enumerate_fix(map, n);
            const auto expected = oracle::brute_force_fix(map, n);
            REQUIRE(records.size() == expected.size());
            for (std::size_t i = 0; i < records.size(); ++i)
                REQUIRE(records[i].point == Catch::Approx(expected[i]).margin(1e-10));
        }
    }
}

TEST_CASE("linear period 3: the seven dyadic rationals") {
    const auto records = enumerate_fix(linear2(), 3);
    REQUIRE(records.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        REQUIRE(records[i].point == Catch::Approx(i / 7.0).margin(1e-15));
        REQUIRE(records[i].exponent == Catch::Approx(std::log(2.0)).margin(1e-12));
        REQUIRE(records[i].period == 3);
    }
    // 8x = x + m gives x = m/7: branch indices name the solved level.
    REQUIRE(solve_branch(linear2(), 3, 3).point == Catch::Approx(3.0 / 7.0).margin(1e-14));
    REQUIRE(solve_branch(linear2(), 3, 7).point == 0.0);
}

TEST_CASE("counting: K^n - 1 records for every built-in") {
    for (const CircleMap& map : {linear2(), trig01(), bla01()})
        for (int n : {1, 2, 5, 9, 12, 14})
            REQUIRE(enumerate_fix(map, n).size() == (std::uint64_t{1} << n) - 1);
}

TEST_CASE("fixed points of the perturbed doubling map") {
    // The only fixed point is x = 0: F(x) - x = x + eps(sin + cos - 1) covers
    // (0, 1) without hitting an integer, and reaches 1 exactly at x = 1 ~ 0.
    const auto records = enumerate_fix(trig01(), 1);
    REQUIRE(records.size() == 1);
    REQUIRE(records[0].point == 0.0);
    REQUIRE(records[0].branch == 1);
    REQUIRE(records[0].exponent ==
            Catch::Approx(std::log(2.0 + 0.02 * kPi)).epsilon(1e-12));
    const PeriodicPointRecord direct = solve_branch(trig01(), 1, 1);
    REQUIRE(direct.point == 0.0);
}

TEST_CASE("fixed points and 2-cycle of the blaschke map") {
    SECTION("period 1: only the theta = 0 fixed point") {
        const auto records = enumerate_fix(bla01(), 1);
        REQUIRE(records.size() == 1);
        REQUIRE(records[0].point == 0.0);
        REQUIRE(records[0].exponent == Catch::Approx(std::log(20.0 / 9.0)).epsilon(1e-12));
    }
    SECTION("period 2: fixed point plus one genuine 2-cycle") {
        // Frozen from the bisection oracle (and verified against mpmath):
        // the 2-cycle {0.32428801097334168, 0.67571198902665832} with
        // chi_2 = 0.64185388617239478.
        const auto records = enumerate_fix(bla01(), 2);
        REQUIRE(records.size() == 3);
        REQUIRE(records[0].point == 0.0);
        REQUIRE(records[0].exponent == Catch::Approx(std::log(20.0 / 9.0)).epsilon(1e-12));
        REQUIRE(records[1].point == Catch::Approx(0.32428801097334168).margin(1e-12));
        REQUIRE(records[2].point == Catch::Approx(0.67571198902665832).margin(1e-12));
        REQUIRE(records[1].exponent == Catch::Approx(0.64185388617239478).margin(1e-12));
        REQUIRE(records[2].exponent == Catch::Approx(0.64185388617239478).margin(1e-12));
    }
}

TEST_CASE("record invariants: residuals, exponent bounds, separation, order") {
    for (const CircleMap& map : {linear2(), trig01(), bla01()}) {
        for (int n : {1, 4, 8, 12}) {
            const auto records = enumerate_fix(map, n);
            const double lo = std::log(map.min_derivative_bound()) - 1e-12;
            const double hi = std::log(map.max_derivative_bound()) + 1e-12;
            const double min_gap = std::pow(map.max_derivative_bound(), -n) / 2.0;
            for (std::size_t i = 0; i < records.size(); ++i) {
                REQUIRE(records[i].residual <= 1e-12);
                REQUIRE(records[i].exponent >= lo);
                REQUIRE(records[i].exponent <= hi);
                if (i > 0) REQUIRE(records[i].point - records[i - 1].point >= min_gap);
            }
        }
    }
}

TEST_CASE("exponents are constant along orbits") {
    for (const CircleMap& map : {trig01(), bla01()}) {
        const int n = 10;
        const auto records = enumerate_fix(map, n);
        for (std::size_t i = 0; i < records.size(); i += 17) {
            const double image = map.step(records[i].point);
            REQUIRE(std::fabs(records[i].exponent - nearest_exponent(records, image)) <= 1e-9);
        }
    }
}

TEST_CASE("divisor nesting: Fix(f^m) inside Fix(f^n) for m | n") {
    for (const CircleMap& map : {trig01(), bla01()}) {
        const auto small = enumerate_fix(map, 5);
        const auto large = enumerate_fix(map, 10);
        for (const auto& rec : small) {
            double best = 1.0;
            for (const auto& big : large) {
                double d = std::fabs(big.point - rec.point);
                best = std::min(best, std::min(d, 1.0 - d));
            }
            REQUIRE(best <= 1e-10);
        }
    }
}

TEST_CASE("sum identity: averages of h over Fix(f^n) telescope") {
    const int n = 10;
    for (const CircleMap& map : {trig01(), bla01()}) {
        const Observable h = log_derivative(map);
        const auto records = enumerate_fix(map, n);
        double sum_chi = 0.0, sum_h = 0.0;
        for (const auto& rec : records) {
            sum_chi += rec.exponent; // = g_n(x_p), the orbit average of h
            sum_h += h(rec.point);
        }
        REQUIRE(std::fabs(sum_chi - sum_h) <= 1e-8 * std::max(1.0, std::fabs(sum_h)));
    }
}

TEST_CASE("birkhoff averages") {
    const Observable h = log_derivative(linear2());
    REQUIRE(birkhoff_average(linear2(), h.value, 1.0 / 7.0, 3) ==
            Catch::Approx(std::log(2.0)).margin(1e-14));
    REQUIRE(birkhoff_average(trig01(), [](double) { return 1.0; }, 0.123, 9) == 1.0);
    // 0 is the fixed point of the perturbed doubling map, so the orbit
    // average collapses to h(0) = ln(2 + 0.02 pi).
    const Observable ht = log_derivative(trig01());
    REQUIRE(birkhoff_average(trig01(), ht.value, 0.0, 5) ==
            Catch::Approx(std::log(2.0 + 0.02 * kPi)).margin(1e-12));
    REQUIRE_THROWS_AS(birkhoff_average(trig01(), ht.value, 0.0, 0), InvalidParameter);
}

TEST_CASE("caps and branch index validation") {
    REQUIRE_THROWS_AS(enumerate_fix(trig01(), 30), CapExceeded);
    REQUIRE_THROWS_AS(enumerate_fix(trig01(), 5, EnumerateOptions{10}), CapExceeded);
    REQUIRE_THROWS_AS(solve_branch(trig01(), 3, 0), InvalidParameter);
    REQUIRE_THROWS_AS(solve_branch(trig01(), 3, 8), InvalidParameter);
    REQUIRE_THROWS_AS(enumerate_fix(trig01(), 0), InvalidParameter);
}

TEST_CASE("solve_branch agrees with enumeration") {
    const auto records = enumerate_fix(bla01(), 10);
    for (std::int64_t m : {std::int64_t{1}, std::int64_t{37}, std::int64_t{1023}}) {
        const PeriodicPointRecord direct = solve_branch(bla01(), 10, m);
        const auto it = std::find_if(records.begin(), records.end(),
                                     [&](const PeriodicPointRecord& r) { return r.branch == m; });
        REQUIRE(it != records.end());
        REQUIRE(direct.point == it->point);
        REQUIRE(direct.exponent == it->exponent);
    }
}

TEST_CASE("exponent multisets") {
    SECTION("linear: 31 copies of ln 2") {
        const EmpiricalDistribution dist = exponent_multiset(linear2(), 5);
        REQUIRE(dist.count() == 31);
        REQUIRE(dist.period == 5);
        for (double v : dist.values)
            REQUIRE(v == Catch::Approx(std::log(2.0)).margin(1e-12));
    }
    SECTION("trig doubling: sorted, inside the analytic derivative range") {
        const EmpiricalDistribution dist = exponent_multiset(trig01(), 10);
        REQUIRE(dist.count() == 1023);
        REQUIRE(std::is_sorted(dist.values.begin(), dist.values.end()));
        REQUIRE(dist.values.front() >= std::log(2.0 - 0.02 * kPi * std::sqrt(2.0)) - 1e-12);
        REQUIRE(dist.values.back() <= std::log(2.0 + 0.02 * kPi * std::sqrt(2.0)) + 1e-12);
    }
}

TEST_CASE("enumeration is bitwise independent of the worker count") {
    const unsigned saved = worker_count();
    set_worker_count(1);
    const auto one = enumerate_fix(trig01(), 12);
    set_worker_count(3);
    const auto three = enumerate_fix(trig01(), 12);
    set_worker_count(saved);
    REQUIRE(one.size() == three.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        REQUIRE(one[i].branch == three[i].branch);
        REQUIRE(one[i].point == three[i].point);
        REQUIRE(one[i].exponent == three[i].exponent);
        REQUIRE(one[i].residual == three[i].residual);
    }
}

TEST_CASE("random perturbed maps agree with the oracle at period 6") {
    auto gen = oracle::rng(77123);
    std::uniform_real_distribution<double> amp(-0.03, 0.03);
    for (int trial = 0; trial < 6; ++trial) {
        const double e1 = amp(gen);
        const double e2 = amp(gen);
        const CircleMap map = CircleMap::custom(
            2,
            [=](double x) {
                return 2.0 * x + e1 * std::sin(kTwoPi * x) + e2 * (std::cos(kTwoPi * x) - 1.0);
            },
            [=](double x) {
                return 2.0 + kTwoPi * (e1 * std::cos(kTwoPi * x) - e2 * std::sin(kTwoPi * x));
            },
            [=](double x) {
                return -kTwoPi * kTwoPi *
                       (e1 * std::sin(kTwoPi * x) + e2 * std::cos(kTwoPi * x));
            });
        const auto records = enumerate_fix(map, 6);
        const auto expected = oracle::brute_force_fix(map, 6);
        REQUIRE(records.size() == 63);
        REQUIRE(expected.size() == 63);
        for (std::size_t i = 0; i < records.size(); ++i)
            REQUIRE(records[i].point == Catch::Approx(expected[i]).margin(1e-10));
    }
}
