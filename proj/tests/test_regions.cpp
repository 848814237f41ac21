#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "smallgain/regions.hpp"

using namespace smallgain;

namespace {

ComparisonFn gain(const char* text, double s_max = 1e7) {
    return ComparisonFn::parse(text, FnClass::KInf, s_max);
}

StorageFn abs_storage(const char* var) {
    return StorageFn(Expr::parse(std::string("abs(") + var + ")", {var}), 1);
}

SmallGainIntervals one_interval(double lo, double hi) {
    SmallGainIntervals out;
    out.intervals.push_back({lo, hi});
    out.terminated_by = std::isinf(hi) ? Termination::UpperInfinite
                                       : Termination::DivergentAbove;
    return out;
}

}  // namespace

TEST_CASE("level set membership") {
    StorageFn v(Expr::parse("x1^2", {"x1"}), 1);
    CHECK(level_set_contains(v, 1.0, std::vector<double>{0.5}));
    CHECK_FALSE(level_set_contains(v, 1.0, std::vector<double>{2.0}));
    // Closed set: the boundary belongs to it.
    StorageFn va = abs_storage("x1");
    CHECK(level_set_contains(va, 0.0, std::vector<double>{0.0}));
    CHECK(level_set_contains(va, 1.0, std::vector<double>{1.0}));
    CHECK_THROWS_AS(level_set_contains(va, 1.0, std::vector<double>{1.0, 2.0}),
                    DimensionMismatchError);
}

TEST_CASE("storage validation") {
    StorageFn good(Expr::parse("x1^2 + x2^2", {"x1", "x2"}), 2);
    Box box(2, {-2.0, 2.0});
    StorageValidation ok = validate_storage(good, box, 256, 5);
    CHECK(ok.passed);

    StorageFn offset(Expr::parse("1 + x1^2", {"x1"}), 1);
    StorageValidation bad = validate_storage(offset, Box(1, {-2.0, 2.0}), 64, 5);
    CHECK_FALSE(bad.passed);
    CHECK_FALSE(bad.zero_at_zero_ok);

    StorageFn indefinite(Expr::parse("x1", {"x1"}), 1);
    StorageValidation neg = validate_storage(indefinite, Box(1, {-2.0, 2.0}), 64, 5);
    CHECK_FALSE(neg.passed);
    CHECK_FALSE(neg.nonpositive_points.empty());
}

TEST_CASE("A1 = {0} when the first lower endpoint is zero") {
    RegionSpec r = build_region(1, one_interval(0.0, 1.0), gain("s/2"), gain("s/3"));
    CHECK(r.a_threshold_v1 == 0.0);
    CHECK(r.a_threshold_v2 == 0.0);
    CHECK(r.b_threshold_v1 == 1.0);
    CHECK(r.b_threshold_v2 == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("hand-evaluated thresholds") {
    // gamma12 = s/2, gamma21 = s/3, lower endpoint 1:
    // A = (max{1, 0.5}, max{1/3, 1/9}) = (1, 1/3); upper endpoint 2: B = (2, 2/3).
    RegionSpec r = build_region(1, one_interval(1.0, 2.0), gain("s/2"), gain("s/3"));
    CHECK(r.a_threshold_v1 == doctest::Approx(1.0));
    CHECK(r.a_threshold_v2 == doctest::Approx(1.0 / 3.0));
    CHECK(r.b_threshold_v1 == doctest::Approx(2.0));
    CHECK(r.b_threshold_v2 == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(r.b_infinite);

    // The alternative reading swaps the inner composition to gamma21(gamma12).
    RegionSpec alt = build_region(1, one_interval(1.0, 2.0), gain("s/2"), gain("s/3"),
                                  InnerComposition::Gamma21Gamma12);
    CHECK(alt.a_threshold_v2 == doctest::Approx(1.0 / 3.0));  // max{1/3, 1/6}
    // A case where the two readings differ: gamma12 = 2s, gamma21 = s/3 at lower 1:
    // as printed: max{1/3, 1/9}; alternative: max{1/3, 2/3}.
    RegionSpec printed = build_region(1, one_interval(1.0, 2.0), gain("2*s"), gain("s/3"));
    RegionSpec swapped = build_region(1, one_interval(1.0, 2.0), gain("2*s"), gain("s/3"),
                                      InnerComposition::Gamma21Gamma12);
    CHECK(printed.a_threshold_v2 == doctest::Approx(1.0 / 3.0));
    CHECK(swapped.a_threshold_v2 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("infinite upper endpoints make B the whole space") {
    RegionSpec r = build_region(1,
                                one_interval(1.0, std::numeric_limits<double>::infinity()),
                                gain("s/2"), gain("s/3"));
    CHECK(r.b_infinite);
    CHECK(std::isinf(r.b_threshold_v1));
    CHECK(in_b_region(r, abs_storage("x1"), abs_storage("x2"),
                      std::vector<double>{1e9, -1e9}));
    CHECK_THROWS_AS(build_region(2, one_interval(0.0, 1.0), gain("s/2"), gain("s/3")),
                    Error);
}

TEST_CASE("composite storage function") {
    CompositeV cv(make_sigma(gain("s"), gain("s")), abs_storage("x1"), abs_storage("x2"));
    CHECK(composite_v(cv, std::vector<double>{1.0, 2.0}) == doctest::Approx(2.0));
    CHECK(composite_v(cv, std::vector<double>{0.0, 0.0}) == doctest::Approx(0.0));

    // sigma = 0.625 s from gamma12 = 4s, gamma21 = s.
    CompositeV cv2(make_sigma(gain("4*s"), gain("s")), abs_storage("x1"),
                   abs_storage("x2"));
    CHECK(composite_v(cv2, std::vector<double>{2.0, 1.0}) ==
          doctest::Approx(1.25).epsilon(1e-9));
}

TEST_CASE("A/B/Gamma classification") {
    CompositeV cv(make_sigma(gain("s"), gain("s")), abs_storage("x1"), abs_storage("x2"));
    CHECK(classify_abgamma(cv, std::vector<double>{2.0, 1.0}, 1e-9) == RegionLabel::A);
    CHECK(classify_abgamma(cv, std::vector<double>{1.0, 2.0}, 1e-9) == RegionLabel::B);
    CHECK(classify_abgamma(cv, std::vector<double>{1.0, 1.0}, 1e-9) == RegionLabel::Gamma);
}

TEST_CASE("partition property: exactly one label, Gamma points sit in the band") {
    CompositeV cv(make_sigma(gain("2*s"), gain("s/2")), abs_storage("x1"),
                  abs_storage("x2"));
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    const double tol = 1e-9;
    for (int i = 0; i < 500; ++i) {
        std::vector<double> x = {dist(rng), dist(rng)};
        const RegionLabel label = classify_abgamma(cv, x, tol);
        const double sv1 = cv.sigma()(cv.v1()(std::span<const double>(x.data(), 1)));
        const double v2 = cv.v2()(std::span<const double>(x.data() + 1, 1));
        const double band = tol * std::max({1.0, std::fabs(sv1), std::fabs(v2)});
        switch (label) {
            case RegionLabel::A: CHECK(v2 < sv1); break;
            case RegionLabel::B: CHECK(v2 > sv1); break;
            case RegionLabel::Gamma: CHECK(std::fabs(v2 - sv1) <= band); break;
        }
    }
}

TEST_CASE("nesting: membership in A_k implies membership in B_k") {
    RegionSpec r = build_region(1, one_interval(1.0, 2.0), gain("s/2"), gain("s/3"));
    StorageFn v1 = abs_storage("x1"), v2 = abs_storage("x2");
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    std::size_t hits = 0;
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> x = {dist(rng), dist(rng)};
        if (in_a_region(r, v1, v2, x)) {
            ++hits;
            CHECK(in_b_region(r, v1, v2, x));
        }
    }
    CHECK(hits > 0);
}

TEST_CASE("monotone thresholds across an interval list") {
    SmallGainIntervals list;
    list.intervals.push_back({1.0, 2.0});
    list.intervals.push_back({3.0, 4.0});
    list.intervals.push_back({5.0, 6.0});
    ComparisonFn g12 = gain("s/2"), g21 = gain("s/3");
    RegionSpec prev = build_region(1, list, g12, g21);
    for (std::size_t k = 2; k <= 3; ++k) {
        RegionSpec cur = build_region(k, list, g12, g21);
        CHECK(cur.a_threshold_v1 >= prev.a_threshold_v1);
        CHECK(cur.a_threshold_v2 >= prev.a_threshold_v2);
        CHECK(cur.b_threshold_v1 >= prev.b_threshold_v1);
        CHECK(cur.b_threshold_v2 >= prev.b_threshold_v2);
        prev = cur;
    }
}
