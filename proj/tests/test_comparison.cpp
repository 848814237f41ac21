#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "smallgain/comparison.hpp"

using namespace smallgain;

namespace {

ComparisonFn gain(const char* text, FnClass cls = FnClass::KInf, double s_max = 1e7) {
    return ComparisonFn::parse(text, cls, s_max);
}

}  // namespace

TEST_CASE("evaluation") {
    ComparisonFn sq = gain("s^2");
    CHECK(sq(0.0) == 0.0);
    CHECK(sq(3.0) == 9.0);
    ComparisonFn wavy = gain("s + 0.1*sin(pi*s)");
    CHECK(wavy(1.0) == doctest::Approx(1.0).epsilon(1e-12));  // sin(pi) = 0
    CHECK_THROWS_AS(sq(-1.0), Error);
}

TEST_CASE("inversion round-trips") {
    ComparisonFn sq = gain("s^2");
    CHECK(invert(sq, 4.0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(invert(sq, 0.0) == 0.0);
    CHECK(invert(gain("s/2"), 0.0) == 0.0);

    ComparisonFn wavy = gain("s + 0.1*sin(pi*s)");
    const double y = wavy(1.5);
    CHECK(invert(wavy, y) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("inversion is unreachable above the overflow guard image") {
    ComparisonFn half = gain("s/2");
    // g(1e12) = 5e11 < 1e13, so the bracket never closes.
    CHECK_THROWS_AS(invert(half, 1e13), UnreachableError);
}

TEST_CASE("round-trip inversion property: 1000 random targets per gain") {
    const char* gains[] = {"s^2", "s/2", "2*s", "s + 0.1*sin(pi*s)", "sqrt(s)"};
    std::mt19937_64 rng(2024);
    for (const char* text : gains) {
        CAPTURE(text);
        ComparisonFn g = gain(text, FnClass::KInf, 1e4);
        const double y_hi = g(g.s_max());
        std::uniform_real_distribution<double> dist(0.0, y_hi);
        for (int i = 0; i < 1000; ++i) {
            const double y = dist(rng);
            const double x = invert(g, y);
            CHECK(std::fabs(g(x) - y) <= 1e-9 * std::max(1.0, y));
        }
    }
}

TEST_CASE("composition") {
    ComparisonFn half = gain("s/2");
    CHECK(compose(half, half)(4.0) == 1.0);
    CHECK(compose(gain("s^2"), gain("s"))(3.0) == 9.0);

    // Fixed points of s^2 composed with identity are exactly {0, 1}.
    ComparisonFn composed = compose(gain("s^2"), gain("s"));
    CHECK(composed(1.0) == 1.0);
    CHECK(composed(0.0) == 0.0);
    CHECK(composed(0.5) < 0.5);
    CHECK(composed(1.5) > 1.5);

    // Composition of K-infinity gains is monotone on a grid.
    ComparisonFn mono = compose(gain("s + 0.1*sin(pi*s)"), gain("s^2"));
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
        const double s = 0.05 * i;
        const double v = mono(s);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("class validation is sample-based and reports violations") {
    CHECK(validate_kinf(gain("s^2")).passed);
    CHECK(validate_kinf(gain("s + 0.1*sin(pi*s)")).passed);

    ValidationReport offset = validate_kinf(gain("1 + s"));
    CHECK_FALSE(offset.passed);
    CHECK_FALSE(offset.zero_at_zero_ok);
    REQUIRE_FALSE(offset.violations.empty());
    CHECK(offset.violations.front().kind == "zero_at_zero");

    ValidationReport wobble = validate_kinf(gain("s + sin(pi*s)"));  // slope dips below 0
    CHECK_FALSE(wobble.strictly_increasing_ok);

    // Bounded function claimed K-infinity fails the heuristic probe.
    ValidationReport bounded = validate_kinf(gain("tanh(s)"));
    CHECK_FALSE(bounded.unboundedness_ok);
    CHECK(bounded.unboundedness_checked);

    // The same function claimed only class K skips the probe. The domain is
    // kept small enough that tanh has not saturated to 1.0 in doubles.
    ValidationReport as_k = validate_kinf(gain("tanh(s)", FnClass::K, 5.0));
    CHECK_FALSE(as_k.unboundedness_checked);
    CHECK(as_k.passed);

    CHECK_THROWS_AS(validate_kinf(gain("s"), 50), Error);  // grid too small
}

TEST_CASE("sigma construction") {
    // Identity gains: sigma(r) = (r + r)/2 = r.
    SigmaFn sigma_id = make_sigma(gain("s"), gain("s"));
    CHECK(sigma_id(2.0) == doctest::Approx(2.0).epsilon(1e-9));

    // gamma12 = 4s, gamma21 = s: sigma(r) = (r/4 + r)/2 = 0.625 r.
    SigmaFn sigma_lin = make_sigma(gain("4*s"), gain("s"));
    CHECK(sigma_lin(1.0) == doctest::Approx(0.625).epsilon(1e-9));
    CHECK(sigma_lin(3.0) == doctest::Approx(1.875).epsilon(1e-9));

    // Hand-evaluated sandwich at r = 0.25 for gamma12 = s^2, gamma21 = s/4.
    SigmaFn sigma = make_sigma(gain("s^2"), gain("s/4"));
    const double r = 0.25;
    const double value = sigma(r);
    CHECK(value == doctest::Approx(0.28125).epsilon(1e-9));
    CHECK(sigma.gamma21()(r) == doctest::Approx(0.0625));
    CHECK(sigma.gamma12_inv(r) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sigma.gamma21()(r) < value);
    CHECK(value < sigma.gamma12_inv(r));
}
