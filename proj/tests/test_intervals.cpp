#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "smallgain/intervals.hpp"

using namespace smallgain;

namespace {

ComparisonFn gain(const char* text, double s_max = 1e7) {
    return ComparisonFn::parse(text, FnClass::KInf, s_max);
}

AlgorithmParams default_params() {
    AlgorithmParams p;
    p.delta = 1e-2;
    return p;
}

// Match a located interval list against the dense-scan oracle. Oracle
// endpoints carry grid resolution; an oracle upper endpoint at the scan bound
// only constrains the located interval to reach at least that far.
void check_against_oracle(const SmallGainIntervals& found,
                          const std::vector<std::pair<double, double>>& oracle,
                          double s_max, double tol) {
    std::size_t fi = 0;
    for (const auto& [lo, hi] : oracle) {
        REQUIRE(fi < found.ell());
        const SmallGainInterval& iv = found.intervals[fi++];
        CHECK(std::fabs(iv.lower - lo) <= tol);
        if (hi >= s_max - tol) {
            CHECK((iv.upper_infinite() || iv.upper >= hi - tol));
        } else {
            REQUIRE_FALSE(iv.upper_infinite());
            CHECK(std::fabs(iv.upper - hi) <= tol);
        }
    }
    // No phantom intervals below the scanned range.
    for (; fi < found.ell(); ++fi) {
        CHECK(found.intervals[fi].lower >= s_max - tol);
    }
}

}  // namespace

TEST_CASE("classify_point trichotomy") {
    ComparisonFn sq = gain("s^2");
    CHECK(classify_point(sq, 0.5, 1e-9) == PointClass::Below);   // 0.25 < 0.5
    CHECK(classify_point(sq, 1.0, 1e-9) == PointClass::Fixed);   // 1^2 = 1
    CHECK(classify_point(sq, 2.0, 1e-9) == PointClass::Above);   // 4 > 2
    CHECK_THROWS_AS(classify_point(sq, 0.0, 1e-9), Error);
}

TEST_CASE("fixed_point_limit") {
    AlgorithmParams p = default_params();

    auto half = [](double s) { return s / 2.0; };
    FixedPointResult r = fixed_point_limit(half, 1.0, p);
    CHECK_FALSE(r.infinite);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(0.0).epsilon(1e-8));

    auto doubling = [](double s) { return 2.0 * s; };
    CHECK(fixed_point_limit(doubling, 1.0, p).infinite);

    ComparisonFn sq = gain("s^2");
    CHECK(fixed_point_limit(sq, 1.5, p).infinite);  // squaring above 1 diverges

    FixedPointResult down = fixed_point_limit(sq, 0.9, p);
    CHECK(down.converged);
    CHECK(down.value == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(down.monotonicity_violations == 0);

    // Unreachable inversions convert to an infinite limit.
    auto unreachable = [](double) -> double { throw UnreachableError(1.0); };
    CHECK(fixed_point_limit(unreachable, 1.0, p).infinite);

    // Iteration cap: a slow crawl toward a tangential fixed point is flagged
    // rather than silently accepted.
    AlgorithmParams tight = p;
    tight.max_inner_iters = 5;
    FixedPointResult capped = fixed_point_limit([](double s) { return 0.999 * s; }, 1.0, tight);
    CHECK_FALSE(capped.converged);
    CHECK_FALSE(capped.infinite);
}

TEST_CASE("gamma = s^2: single interval (0, 1), divergent above") {
    SmallGainIntervals out = find_intervals(gain("s^2"), gain("s"), default_params());
    REQUIRE(out.ell() == 1);
    CHECK(out.terminated_by == Termination::DivergentAbove);
    CHECK(out.intervals[0].lower == doctest::Approx(0.0).epsilon(1e-6));
    REQUIRE_FALSE(out.intervals[0].upper_infinite());
    CHECK(std::fabs(out.intervals[0].upper - 1.0) <= 1e-6);
}

TEST_CASE("gamma = sqrt(s): single interval (1, inf)") {
    SmallGainIntervals out = find_intervals(gain("s"), gain("sqrt(s)", 1e13),
                                            default_params());
    REQUIRE(out.ell() == 1);
    CHECK(out.terminated_by == Termination::UpperInfinite);
    CHECK(std::fabs(out.intervals[0].lower - 1.0) <= 1e-6);
    CHECK(out.intervals[0].upper_infinite());
    CHECK(out.diagnostics.above_runs >= 1);  // first probe climbs 0.01 -> 1
}

TEST_CASE("gamma = s/2: interval (0, inf)") {
    SmallGainIntervals out = find_intervals(gain("s/2"), gain("s"), default_params());
    REQUIRE(out.ell() == 1);
    CHECK(out.terminated_by == Termination::UpperInfinite);
    CHECK(out.intervals[0].lower == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(out.intervals[0].upper_infinite());
}

TEST_CASE("gamma = 2s: no intervals, divergent above") {
    SmallGainIntervals out = find_intervals(gain("2*s"), gain("s"), default_params());
    CHECK(out.ell() == 0);
    CHECK(out.terminated_by == Termination::DivergentAbove);
}

TEST_CASE("sin gain: intervals at integer pairs under an outer cap") {
    AlgorithmParams p = default_params();
    p.max_outer_iters = 8;
    SmallGainIntervals out = find_intervals(gain("s"), gain("s + 0.1*sin(pi*s)"), p);
    REQUIRE(out.ell() >= 3);
    CHECK(out.terminated_by == Termination::OuterCap);
    const double expect[3][2] = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
    for (int k = 0; k < 3; ++k) {
        CHECK(std::fabs(out.intervals[k].lower - expect[k][0]) <= 1e-6);
        REQUIRE_FALSE(out.intervals[k].upper_infinite());
        CHECK(std::fabs(out.intervals[k].upper - expect[k][1]) <= 1e-6);
    }
}

TEST_CASE("endpoint fixed-point property") {
    const AlgorithmParams p = default_params();
    struct Pair {
        const char* g12;
        const char* g21;
        double s_max;
    } pairs[] = {{"s^2", "s", 1e7},
                 {"s", "s + 0.1*sin(pi*s)", 1e7},
                 {"s", "sqrt(s)", 1e13}};
    for (const auto& pr : pairs) {
        CAPTURE(pr.g12);
        ComparisonFn g12 = gain(pr.g12), g21 = gain(pr.g21, pr.s_max);
        ComparisonFn composed = compose(g12, g21);
        AlgorithmParams capped = p;
        capped.max_outer_iters = 8;
        SmallGainIntervals out = find_intervals(g12, g21, capped);
        for (const auto& iv : out.intervals) {
            if (iv.lower > 0.0) {
                CHECK(std::fabs(composed(iv.lower) - iv.lower) <=
                      1e-9 * std::max(1.0, iv.lower));
            }
            if (!iv.upper_infinite()) {
                CHECK(std::fabs(composed(iv.upper) - iv.upper) <=
                      1e-9 * std::max(1.0, iv.upper));
            }
        }
    }
}

TEST_CASE("interval ordering, midpoint SGC, and iteration diagnostics") {
    AlgorithmParams p = default_params();
    p.max_outer_iters = 10;
    ComparisonFn g12 = gain("s"), g21 = gain("s + 0.1*sin(pi*s)");
    ComparisonFn composed = compose(g12, g21);
    SmallGainIntervals out = find_intervals(g12, g21, p);
    REQUIRE(out.ell() >= 2);
    for (std::size_t k = 0; k < out.ell(); ++k) {
        const auto& iv = out.intervals[k];
        if (k > 0) {
            CHECK(out.intervals[k - 1].upper <= iv.lower + 1e-9);
        }
        if (!iv.upper_infinite()) {
            const double mid = 0.5 * (iv.lower + iv.upper);
            CHECK(composed(mid) < mid);
        }
        const auto& d = out.diagnostics.per_interval[k];
        CHECK(d.monotonicity_violations == 0);
        CHECK(d.lower_converged);
        CHECK(d.upper_converged);
    }
    CHECK_FALSE(out.any_unconverged);
}

TEST_CASE("brute-force oracle basics") {
    CHECK_THROWS_AS(brute_force_intervals(gain("s"), 10.0, 100), Error);

    auto sq = brute_force_intervals(compose(gain("s^2"), gain("s")), 3.0, 30000);
    REQUIRE(sq.size() == 1);
    CHECK(std::fabs(sq[0].first - 0.0) <= 2e-4);
    CHECK(std::fabs(sq[0].second - 1.0) <= 2e-4);

    auto half = brute_force_intervals(gain("s/2"), 10.0, 10000);
    REQUIRE(half.size() == 1);
    CHECK(half[0].first == 0.0);
    CHECK(half[0].second == 10.0);  // clipped at the scan bound

    CHECK(brute_force_intervals(gain("2*s"), 10.0, 10000).empty());
}

TEST_CASE("oracle equivalence on the fixture suite") {
    struct Pair {
        const char* g12;
        const char* g21;
        double s_max;
    } pairs[] = {{"s^2", "s", 1e7},
                 {"s", "sqrt(s)", 1e13},
                 {"s/2", "s", 1e7},
                 {"2*s", "s", 1e7},
                 {"s", "s + 0.1*sin(pi*s)", 1e7}};
    const double s_max = 10.0;
    const std::size_t n = 100000;
    AlgorithmParams p = default_params();
    p.max_outer_iters = 16;
    for (const auto& pr : pairs) {
        CAPTURE(pr.g12, pr.g21);
        ComparisonFn g12 = gain(pr.g12), g21 = gain(pr.g21, pr.s_max);
        SmallGainIntervals found = find_intervals(g12, g21, p);
        auto oracle = brute_force_intervals(compose(g12, g21), s_max, n);
        check_against_oracle(found, oracle, s_max,
                             std::max(p.delta, 2.0 * s_max / static_cast<double>(n)));
    }
}

TEST_CASE("halving delta only refines, never loses intervals") {
    AlgorithmParams coarse = default_params();
    coarse.max_outer_iters = 10;
    AlgorithmParams fine = coarse;
    fine.delta = coarse.delta / 2.0;
    struct Pair {
        const char* g12;
        const char* g21;
    } pairs[] = {{"s^2", "s"}, {"s", "s + 0.1*sin(pi*s)"}, {"s/2", "s"}};
    for (const auto& pr : pairs) {
        CAPTURE(pr.g12, pr.g21);
        ComparisonFn g12 = gain(pr.g12), g21 = gain(pr.g21);
        SmallGainIntervals a = find_intervals(g12, g21, coarse);
        SmallGainIntervals b = find_intervals(g12, g21, fine);
        REQUIRE(b.ell() >= a.ell());
        for (std::size_t k = 0; k < a.ell(); ++k) {
            CHECK(std::fabs(a.intervals[k].lower - b.intervals[k].lower) <= coarse.delta);
            if (!a.intervals[k].upper_infinite()) {
                REQUIRE_FALSE(b.intervals[k].upper_infinite());
                CHECK(std::fabs(a.intervals[k].upper - b.intervals[k].upper) <= coarse.delta);
            }
        }
    }
}

TEST_CASE("continuum of fixed points is traversed at pace delta") {
    // gamma = s on [0, 1] then < s beyond: min(s, 1 + (s-1)/2) composed with
    // identity. The Fixed branch must walk across [0,1] before the Below
    // branch finds the interval (1, inf).
    ComparisonFn g12 = gain("min(s, 1 + (s - 1)/2)");
    ComparisonFn g21 = gain("s");
    AlgorithmParams p = default_params();
    SmallGainIntervals out = find_intervals(g12, g21, p);
    CHECK(out.diagnostics.fixed_advances >= 90);  // ~1/delta Step-3 advances
    REQUIRE(out.ell() == 1);
    CHECK(out.intervals[0].lower == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(out.intervals[0].upper_infinite());
}

TEST_CASE("algorithm parameter validation") {
    AlgorithmParams p = default_params();
    p.delta = 0.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = default_params();
    p.eps_conv = p.eps_fix * 10.0;
    CHECK_THROWS_AS(p.validate(), Error);
}
