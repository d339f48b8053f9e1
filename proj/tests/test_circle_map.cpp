#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lyapchi/circle_map.hpp"
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

// min f' of the trig family is 2 - 2 pi eps sqrt(2), attained where
// cos - sin = -sqrt(2); the Blaschke minimum 1 + (1-a)/(1+a) sits at t = 1/2.
const double kTrigMinFp = 2.0 - 0.02 * kPi * std::sqrt(2.0);
const double kTrigMaxFp = 2.0 + 0.02 * kPi * std::sqrt(2.0);
const double kBlaMinFp = 20.0 / 11.0;
const double kBlaMaxFp = 20.0 / 9.0;

} // namespace

TEST_CASE("built-in lifts satisfy the degree identity") {
    for (const CircleMap& map : {linear2(), trig01(), bla01()}) {
        const int k = map.degree();
        for (int i = 0; i < 10000; ++i) {
            const double x = i / 10000.0;
            REQUIRE(std::fabs(map.lift(x + 1.0) - map.lift(x) - k) <= 1e-12 * k);
        }
    }
}

TEST_CASE("derivatives are consistent with finite differences of the lift") {
    const double delta = 1e-5;
    for (const CircleMap& map : {linear2(), trig01(), bla01()}) {
        for (int i = 0; i < 1000; ++i) {
            const double x = i / 1000.0;
            const double fd1 = (map.lift(x + delta) - map.lift(x - delta)) / (2.0 * delta);
            REQUIRE(std::fabs(fd1 - map.derivative(x)) <= 5e-8);
            const double fd2 =
                (map.derivative(x + delta) - map.derivative(x - delta)) / (2.0 * delta);
            REQUIRE(std::fabs(fd2 - map.second_derivative(x)) <= 1e-6);
        }
    }
}

TEST_CASE("expansivity certificates bound min f' from below") {
    SECTION("linear: f'' = 0 so the bound is exact") {
        REQUIRE(linear2().certificate().lambda_star == 2.0);
        REQUIRE(linear2().certificate().max_second_derivative == 0.0);
    }
    SECTION("trig doubling") {
        const double ls = trig01().certificate().lambda_star;
        REQUIRE(ls > kTrigMinFp - 1e-3);
        REQUIRE(ls <= kTrigMinFp);
        REQUIRE(ls > 1.0);
    }
    SECTION("blaschke") {
        const double ls = bla01().certificate().lambda_star;
        REQUIRE(ls > kBlaMinFp - 1e-3);
        REQUIRE(ls <= kBlaMinFp);
    }
    SECTION("recertification on a finer grid tightens the slack") {
        const ExpansivityCertificate fine = expansivity_certificate(trig01(), 65536);
        REQUIRE(fine.grid_size == 65536);
        REQUIRE(fine.lambda_star > kTrigMinFp - 2e-5);
        REQUIRE(fine.lambda_star <= kTrigMinFp);
        REQUIRE_THROWS_AS(expansivity_certificate(trig01(), 512), InvalidParameter);
    }
    SECTION("upper derivative bounds") {
        REQUIRE(trig01().max_derivative_bound() >= kTrigMaxFp);
        REQUIRE(bla01().max_derivative_bound() >= kBlaMaxFp);
        REQUIRE(trig01().max_derivative_bound() <= kTrigMaxFp + 1e-3);
    }
}

TEST_CASE("rejected parameters") {
    REQUIRE_THROWS_AS(CircleMap::linear(1), InvalidParameter);
    REQUIRE_THROWS_AS(CircleMap::trig_doubling(0.2), NotExpanding);
    REQUIRE_THROWS_AS(CircleMap::blaschke(1.0), InvalidParameter);
    REQUIRE_THROWS_AS(CircleMap::blaschke(-1.3), InvalidParameter);
    // Custom maps are certified, not trusted: a lift of the wrong degree and a
    // wrong derivative must both be caught.
    REQUIRE_THROWS_AS(CircleMap::custom(
                          3, [](double x) { return 2.0 * x; }, [](double) { return 2.0; },
                          [](double) { return 0.0; }),
                      InvalidParameter);
    REQUIRE_THROWS_AS(CircleMap::custom(
                          2, [](double x) { return 2.0 * x; }, [](double) { return 2.5; },
                          [](double) { return 0.0; }),
                      InvalidParameter);
    REQUIRE_THROWS_AS(CircleMap::custom(
                          2, [](double x) { return x + 0.01 * std::sin(kTwoPi * x); },
                          [](double x) { return 1.0 + 0.01 * kTwoPi * std::cos(kTwoPi * x); },
                          [](double x) { return -0.01 * kTwoPi * kTwoPi * std::sin(kTwoPi * x); }),
                      InvalidParameter); // degree 1 is not accepted at all
}

TEST_CASE("blaschke angle map matches the complex-argument oracle") {
    const double a = 0.1;
    const CircleMap& map = bla01();
    SECTION("closed-form derivative at 0") {
        REQUIRE(map.derivative(0.0) == Catch::Approx(1.0 + 0.99 / 0.81).epsilon(1e-14));
    }
    SECTION("lift fraction equals arg(B(e^{2 pi i t}))") {
        for (int i = 0; i < 997; ++i) {
            const double t = i / 997.0;
            const double lift = map.lift(t);
            const double frac = lift - std::floor(lift);
            double diff = std::fabs(frac - oracle::blaschke_angle(a, t));
            diff = std::min(diff, 1.0 - diff); // both live on the circle
            REQUIRE(diff <= 1e-12);
        }
    }
    SECTION("derivative matches finite differences of the angle oracle") {
        const double h = 1e-6;
        for (double t : {0.0, 0.1, 0.23, 0.5, 0.61, 0.875}) {
            double lo = oracle::blaschke_angle(a, t - h);
            double hi = oracle::blaschke_angle(a, t + h);
            if (hi < lo) hi += 1.0; // unwrap across the cut
            REQUIRE(std::fabs((hi - lo) / (2.0 * h) - map.derivative(t)) <= 1e-6);
        }
    }
}

TEST_CASE("log-derivative observable") {
    SECTION("linear: h = ln 2, h' = 0") {
        const Observable h = log_derivative(linear2());
        REQUIRE(h(0.37) == std::log(2.0));
        REQUIRE(h.derivative(0.37) == 0.0);
    }
    SECTION("trig doubling at 0") {
        const Observable h = log_derivative(trig01());
        REQUIRE(h(0.0) == Catch::Approx(std::log(2.0 + 0.02 * kPi)).epsilon(1e-14));
    }
    SECTION("blaschke at 0 and 1/2") {
        const Observable h = log_derivative(bla01());
        REQUIRE(h(0.0) == Catch::Approx(std::log(20.0 / 9.0)).epsilon(1e-14));
        REQUIRE(h(0.5) == Catch::Approx(std::log(20.0 / 11.0)).epsilon(1e-14));
    }
    SECTION("h' = f''/f' matches finite differences of h") {
        const Observable h = log_derivative(bla01());
        const double d = 1e-6;
        for (double x : {0.05, 0.31, 0.5, 0.77}) {
            const double fd = (h(x + d) - h(x - d)) / (2.0 * d);
            REQUIRE(std::fabs(fd - h.derivative(x)) <= 1e-6);
        }
    }
}

TEST_CASE("blaschke preserves Lebesgue measure") {
    // sum over preimages of 1/f'(y) = 1; preimages located by bisection on
    // the lift, independently of the library's solvers.
    const CircleMap& map = bla01();
    const double f0 = map.lift(0.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = i / 1000.0;
        double sum = 0.0;
        const double j0 = std::ceil(f0 - x);
        for (int b = 0; b < map.degree(); ++b) {
            const double target = x + j0 + b;
            const double y =
                oracle::bisect([&](double u) { return map.lift(u) - target; }, 0.0, 1.0, 1e-15);
            sum += 1.0 / map.derivative(y);
        }
        worst = std::max(worst, std::fabs(sum - 1.0));
    }
    REQUIRE(worst <= 1e-8);
}

TEST_CASE("map ids round-trip") {
    REQUIRE(CircleMap::from_id("linear:2").degree() == 2);
    REQUIRE(CircleMap::from_id("trigdoubling:0.01").family() == MapFamily::TrigPerturbedDoubling);
    REQUIRE(CircleMap::from_id("blaschke:0.1").parameters()[0] == 0.1);
    REQUIRE(CircleMap::from_id(trig01().id()).parameters()[0] == 0.01);
    REQUIRE(linear2().id() == "linear:2");
    REQUIRE_THROWS_AS(CircleMap::from_id("noff"), InvalidParameter);
    REQUIRE_THROWS_AS(CircleMap::from_id("henon:1.4"), InvalidParameter);
    REQUIRE_THROWS_AS(CircleMap::from_id("linear:x"), InvalidParameter);
    REQUIRE_THROWS_AS(CircleMap::from_id("blaschke:"), InvalidParameter);
    REQUIRE_THROWS_AS(CircleMap::from_id("linear:2.5"), InvalidParameter);
}

TEST_CASE("custom maps are normalized to F(0) in [0,1) and certified") {
    const CircleMap shifted = CircleMap::custom(
        2, [](double x) { return 2.0 * x + 5.3; }, [](double) { return 2.0; },
        [](double) { return 0.0; });
    REQUIRE(shifted.lift(0.0) == Catch::Approx(0.3).margin(1e-15));
    REQUIRE(shifted.certificate().lambda_star == 2.0);
    REQUIRE(shifted.family() == MapFamily::Custom);
}

TEST_CASE("random perturbed doubling maps construct and certify") {
    auto gen = oracle::rng(20240811);
    std::uniform_real_distribution<double> amp(-0.02, 0.02);
    for (int trial = 0; trial < 10; ++trial) {
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
        REQUIRE(map.certificate().lambda_star > 1.0);
        for (int i = 0; i < 100; ++i) {
            const double x = i / 100.0;
            REQUIRE(std::fabs(map.lift(x + 1.0) - map.lift(x) - 2.0) <= 2e-12);
            REQUIRE(map.derivative(x) >= map.certificate().lambda_star);
        }
    }
}
