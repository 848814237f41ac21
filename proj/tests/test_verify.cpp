#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "smallgain/verify.hpp"

using namespace smallgain;

TEST_CASE("sgc margins on hand-checked intervals") {
    ComparisonFn g12 = fixtures::kinf("s^2"), g21 = fixtures::kinf("s");
    CheckReport rep = check_sgc_on_interval(g12, g21, {0.0, 1.0}, 99);
    CHECK(rep.passed());
    CHECK(rep.checked_points == 99);
    // Interior sample at s = 0.5 has margin 0.5 - 0.25 = 0.25.
    bool found = false;
    for (std::size_t i = 1; i <= 99; ++i) {
        const double s = static_cast<double>(i) / 100.0;
        if (std::fabs(s - 0.5) < 1e-12) found = true;
    }
    CHECK(found);
    CHECK(rep.min_margin > 0.0);

    ComparisonFn half = fixtures::kinf("s/2");
    CheckReport halves = check_sgc_on_interval(half, g21, {0.0, 10.0}, 50);
    CHECK(halves.passed());
    // margin s - s/2 = s/2 grows with s; the minimum sits at the smallest sample.
    CHECK(halves.min_margin == doctest::Approx(10.0 / 51.0 / 2.0).epsilon(1e-9));

    CheckReport bad = check_sgc_on_interval(fixtures::kinf("2*s"), g21, {0.0, 1.0}, 50);
    CHECK_FALSE(bad.passed());
    CHECK(bad.min_margin < 0.0);
    CHECK(bad.violation_count == 50);

    CHECK_THROWS_AS(check_sgc_on_interval(g12, g21, {0.0, 1.0}, 5), Error);
    CHECK_THROWS_AS(check_sgc_on_interval(
                        g12, g21, {0.0, std::numeric_limits<double>::infinity()}, 50),
                    Error);
}

TEST_CASE("iss-lyapunov: stable linear certificate holds at sampled points") {
    InterconnectionSpec sys = fixtures::stable_linear();
    LyapunovCheckParams params;
    params.samples = 4000;
    params.x_box = Box(2, {-2.0, 2.0});
    params.u_box = Box(2, {0.0, 0.0});
    params.seed = 42;
    for (int subsystem : {1, 2}) {
        CAPTURE(subsystem);
        CheckReport rep = check_iss_lyapunov(sys, subsystem, params);
        CHECK(rep.passed());
        CHECK(rep.checked_points > 500);   // plenty of triggered points
        CHECK(rep.skipped_points > 0);     // and plenty of vacuous ones
        CHECK(rep.min_margin >= 0.0);
    }
}

TEST_CASE("iss-lyapunov hand-evaluated points") {
    // At (x1, x2, u1) = (1, 1, 0): trigger 1 >= max{0.5, 0}; the derivative is
    // sign(1) * (-1 + 0.25) = -0.75 <= -0.5.
    InterconnectionSpec sys = fixtures::stable_linear();
    LyapunovCheckParams params;
    params.samples = 100;
    params.x_box = {{1.0, 1.0}, {1.0, 1.0}};
    params.u_box = Box(2, {0.0, 0.0});
    CheckReport rep = check_iss_lyapunov(sys, 1, params);
    CHECK(rep.passed());
    CHECK(rep.checked_points == 100);
    CHECK(rep.min_margin == doctest::Approx(0.25 + params.fd_slack).epsilon(1e-9));

    // At (0.1, 1, 0) the trigger 0.1 >= 0.5 fails: every point is vacuous.
    params.x_box = {{0.1, 0.1}, {1.0, 1.0}};
    CheckReport vacuous = check_iss_lyapunov(sys, 1, params);
    CHECK(vacuous.checked_points == 0);
    CHECK(vacuous.skipped_points == 100);
}

TEST_CASE("iss-lyapunov: unstable subsystem cannot be certified") {
    // f1 = +x1 with V = |x1|: at (1, 0, 0) the derivative is +1 > -0.5.
    InterconnectionSpec sys = fixtures::decoupled_unstable();
    LyapunovCheckParams params;
    params.samples = 100;
    params.x_box = {{1.0, 1.0}, {0.0, 0.0}};
    params.u_box = Box(2, {0.0, 0.0});
    CheckReport rep = check_iss_lyapunov(sys, 1, params);
    CHECK_FALSE(rep.passed());
    CHECK(rep.violation_count == 100);
    CHECK(rep.min_margin == doctest::Approx(-1.5 + params.fd_slack).epsilon(1e-9));

    // Over a box, violations dominate the triggered points.
    params.samples = 2000;
    params.x_box = Box(2, {-2.0, 2.0});
    CheckReport box = check_iss_lyapunov(sys, 1, params);
    CHECK(box.violation_count * 100 > 95 * box.checked_points);
}

TEST_CASE("iss-lyapunov skips nondifferentiable points of |x|") {
    InterconnectionSpec sys = fixtures::stable_linear();
    LyapunovCheckParams params;
    params.samples = 100;
    // x1 pinned inside the finite-difference step of |x1| at zero: the
    // one-sided differences disagree and the point must be skipped, matching
    // the almost-everywhere reading.
    params.x_box = {{1e-9, 1e-9}, {0.0, 0.0}};
    params.u_box = Box(2, {0.0, 0.0});
    CheckReport rep = check_iss_lyapunov(sys, 1, params);
    CHECK(rep.checked_points == 0);
    CHECK(rep.skipped_points == 100);
}

TEST_CASE("dpi: identity and contracting fields") {
    // f = (x1, x2), rho = 1, q = 1: div = 2 >= 1 everywhere.
    InterconnectionSpec expand(
        1, 1, 0, 0, fixtures::field1(2, 0, {"x1"}), fixtures::field2(2, 0, 0, {"x2"}),
        StorageFn(Expr::parse("abs(x1)", {"x1"}), 1),
        StorageFn(Expr::parse("abs(x2)", {"x2"}), 1), fixtures::kinf("0.5*s"),
        fixtures::kinf("0.5*s"), fixtures::kinf("2*s"), fixtures::kinf("2*s"),
        fixtures::kinf("0.5*s"), fixtures::kinf("0.5*s"), {});
    const auto xs = state_names(2);
    DpiBlock block(1, Expr::parse("1", xs), Expr::parse("1", xs),
                   ComparisonFn::parse("s", FnClass::K, 1e7), Box(2, {-2.0, 2.0}));
    DpiCheckParams params;
    params.grid = {16, 16};
    params.u_values = {{}};
    CheckReport rep = check_dpi(expand, block, params);
    CHECK(rep.passed());
    CHECK(rep.min_margin == doctest::Approx(1.0 + params.fd_slack).epsilon(1e-6));

    // f = (-x1, -x2), q = 0.1: div = -2 < 0.1 everywhere.
    InterconnectionSpec contract(
        1, 1, 0, 0, fixtures::field1(2, 0, {"-x1"}), fixtures::field2(2, 0, 0, {"-x2"}),
        StorageFn(Expr::parse("abs(x1)", {"x1"}), 1),
        StorageFn(Expr::parse("abs(x2)", {"x2"}), 1), fixtures::kinf("0.5*s"),
        fixtures::kinf("0.5*s"), fixtures::kinf("2*s"), fixtures::kinf("2*s"),
        fixtures::kinf("0.5*s"), fixtures::kinf("0.5*s"), {});
    DpiBlock block2(1, Expr::parse("1", xs), Expr::parse("0.1", xs),
                    ComparisonFn::parse("s", FnClass::K, 1e7), Box(2, {-2.0, 2.0}));
    CheckReport bad = check_dpi(contract, block2, params);
    CHECK_FALSE(bad.passed());
    CHECK(bad.violation_count == bad.checked_points);

    CHECK_THROWS_AS(([&] {
                        DpiCheckParams tiny;
                        tiny.grid = {4, 4};
                        return check_dpi(expand, block, tiny);
                    }()),
                    Error);
}

TEST_CASE("dpi finite differences track the analytic divergence of a cubic field") {
    // f = (x1*(1 - x1^2), 0.5*x2): div = 1.5 - 3*x1^2. At (0.5, 0) this is 0.75.
    InterconnectionSpec sys = fixtures::cubic_divergence();
    const auto xs = state_names(2);
    DpiCheckParams params;
    params.grid = {32, 32};
    params.fd_slack = 1e-6;
    params.u_values = {{}};

    DpiBlock lower_bound(1, Expr::parse("1", xs), Expr::parse("1.5 - 3*x1^2", xs),
                         ComparisonFn::parse("s", FnClass::K, 1e7), Box(2, {-2.0, 2.0}));
    CheckReport ge = check_dpi(sys, lower_bound, params);
    CHECK(ge.passed());  // fd >= analytic - 1e-6 at all 1024 grid points

    InterconnectionSpec neg = fixtures::cubic_divergence(true);
    DpiBlock upper_bound(1, Expr::parse("1", xs), Expr::parse("3*x1^2 - 1.5", xs),
                         ComparisonFn::parse("s", FnClass::K, 1e7), Box(2, {-2.0, 2.0}));
    CheckReport le = check_dpi(neg, upper_bound, params);
    CHECK(le.passed());  // -fd >= -analytic - 1e-6, i.e. fd <= analytic + 1e-6

    // Spot value at (0.5, 0).
    InterconnectionSpec sys2 = fixtures::cubic_divergence();
    DpiBlock spot(1, Expr::parse("1", xs), Expr::parse("0.75 - 1e-6", xs),
                  ComparisonFn::parse("s", FnClass::K, 1e7),
                  Box{{0.5, 0.5 + 1e-7}, {-1e-7, 1e-7}});
    DpiCheckParams spot_params;
    spot_params.grid = {8, 8};
    spot_params.u_values = {{}};
    CheckReport at = check_dpi(sys2, spot, spot_params);
    CHECK(at.passed());
    CHECK(at.min_margin <= 3e-6);  // fd value within ~1e-6 of 0.75
}

TEST_CASE("dpi trigger: larger inputs can only shrink the checked set") {
    InterconnectionSpec sys = fixtures::stable_linear();
    const auto xs = state_names(2);
    DpiBlock block(1, Expr::parse("1", xs), Expr::parse("0 - 3", xs),
                   ComparisonFn::parse("s", FnClass::K, 1e7), Box(2, {-1.0, 1.0}));
    DpiCheckParams params;
    params.grid = {16, 16};
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double level : {0.0, 0.5, 1.5}) {
        params.u_values = {{level, 0.0}};
        CheckReport rep = check_dpi(sys, block, params);
        CHECK(rep.checked_points <= prev);
        prev = rep.checked_points;
    }
}

TEST_CASE("dpi block invariants: rho positivity and q sign sampling") {
    InterconnectionSpec sys = fixtures::stable_linear();
    const auto xs = state_names(2);
    DpiBlock good(1, Expr::parse("1 + x1^2", xs), Expr::parse("x2^2", xs),
                  ComparisonFn::parse("s", FnClass::K, 1e7), Box(2, {-1.0, 1.0}));
    CheckReport ok = check_dpi_block_invariants(sys, good, {9, 9});
    CHECK(ok.passed());
    // The grid hits x2 = 0 where q = 0: surfaced as a note, not a violation.
    REQUIRE_FALSE(ok.notes.empty());
    CHECK(ok.notes.front().find("q == 0") != std::string::npos);

    DpiBlock bad(1, Expr::parse("x1", xs), Expr::parse("1", xs),
                 ComparisonFn::parse("s", FnClass::K, 1e7), Box(2, {-1.0, 1.0}));
    CHECK_FALSE(check_dpi_block_invariants(sys, bad, {9, 9}).passed());
}

TEST_CASE("gap fixture: divergence certificate and containment hold") {
    InterconnectionSpec sys = fixtures::gap();
    REQUIRE(sys.dpi_blocks().size() == 4);
    DpiCheckParams params;
    params.grid = {24, 24};
    params.u_values = {{0.0, 0.0}};
    for (const DpiBlock& b : sys.dpi_blocks()) {
        CheckReport rep = check_dpi(sys, b, params);
        CAPTURE(rep.min_margin);
        CHECK(rep.passed());
        CHECK(check_dpi_block_invariants(sys, b, params.grid).passed());
    }

    // Containment of A_2 \ B_1 in the union of the four strips.
    RegionSpec a2, b1;
    a2.k = 2;
    a2.a_threshold_v1 = fixtures::gap_crossing_high();
    a2.a_threshold_v2 = fixtures::gap_crossing_high();
    a2.b_threshold_v1 = std::numeric_limits<double>::infinity();
    a2.b_threshold_v2 = std::numeric_limits<double>::infinity();
    a2.b_infinite = true;
    b1.k = 1;
    b1.a_threshold_v1 = 0.0;
    b1.a_threshold_v2 = 0.0;
    b1.b_threshold_v1 = fixtures::gap_crossing_low();
    b1.b_threshold_v2 = fixtures::gap_crossing_low();
    std::vector<Box> boxes;
    for (const DpiBlock& b : sys.dpi_blocks()) boxes.push_back(b.domain_box);
    CheckReport contain = check_dpi_containment(sys, 2, boxes, a2, b1, 4000, 1.5, 3);
    CHECK(contain.passed());
    CHECK(contain.checked_points > 100);  // the frame was actually sampled
}
