#pragma once

// Desk-scale interconnections shared by the unit and acceptance suites.

#include <cmath>
#include <string>
#include <vector>

#include "smallgain/system.hpp"

namespace fixtures {

using namespace smallgain;

inline ComparisonFn kinf(const std::string& text, double s_max = 1e7) {
    return ComparisonFn::parse(text, FnClass::KInf, s_max);
}

inline std::vector<Expr> field1(std::size_t n, std::size_t m1,
                                const std::vector<std::string>& comps) {
    std::vector<Expr> out;
    for (const auto& c : comps) out.push_back(Expr::parse(c, field_schema(n, 0, m1)));
    return out;
}

inline std::vector<Expr> field2(std::size_t n, std::size_t m1, std::size_t m,
                                const std::vector<std::string>& comps) {
    std::vector<Expr> out;
    for (const auto& c : comps) out.push_back(Expr::parse(c, field_schema(n, m1, m)));
    return out;
}

/// Two coupled scalar subsystems with |x_i| storage; globally small-gain
/// (gamma12 o gamma21 = s/4 < s), Hurwitz interconnection matrix.
inline InterconnectionSpec stable_linear() {
    return InterconnectionSpec(
        1, 1, 1, 1, field1(2, 1, {"-x1 + 0.25*x2 + u1"}),
        field2(2, 1, 2, {"-x2 + 0.25*x1 + u2"}),
        StorageFn(Expr::parse("abs(x1)", {"x1"}), 1),
        StorageFn(Expr::parse("abs(x2)", {"x2"}), 1), kinf("0.5*s"), kinf("0.5*s"),
        kinf("2*s"), kinf("2*s"), kinf("0.5*s"), kinf("0.5*s"), {});
}

/// Sign-flipped variant: the same certificates, unstable dynamics.
inline InterconnectionSpec unstable_linear() {
    return InterconnectionSpec(
        1, 1, 1, 1, field1(2, 1, {"x1 + 0.25*x2 + u1"}),
        field2(2, 1, 2, {"x2 + 0.25*x1 + u2"}),
        StorageFn(Expr::parse("abs(x1)", {"x1"}), 1),
        StorageFn(Expr::parse("abs(x2)", {"x2"}), 1), kinf("0.5*s"), kinf("0.5*s"),
        kinf("2*s"), kinf("2*s"), kinf("0.5*s"), kinf("0.5*s"), {});
}

/// Decoupled unstable negative control: dx_i/dt = x_i with vacuous
/// certificates.
inline InterconnectionSpec decoupled_unstable() {
    return InterconnectionSpec(
        1, 1, 1, 1, field1(2, 1, {"x1"}), field2(2, 1, 2, {"x2"}),
        StorageFn(Expr::parse("abs(x1)", {"x1"}), 1),
        StorageFn(Expr::parse("abs(x2)", {"x2"}), 1), kinf("0.5*s"), kinf("0.5*s"),
        kinf("2*s"), kinf("2*s"), kinf("0.5*s"), kinf("0.5*s"), {});
}

/// Gain curve of the gap fixture: a Gaussian bump pushes gamma above the
/// identity on (~1.2615, ~5.7385) while staying strictly increasing.
inline std::string gap_gamma12_text() {
    return "0.9*s + 0.35*s*exp(-0.25*(s - 3.5)^2)";
}

/// Analytic crossings of gap_gamma12 with the identity: 3.5 -+ 2*sqrt(ln 3.5).
inline double gap_crossing_low() { return 3.5 - 2.0 * std::sqrt(std::log(3.5)); }
inline double gap_crossing_high() { return 3.5 + 2.0 * std::sqrt(std::log(3.5)); }

/// Feedback interconnection whose composed gain violates the small-gain
/// condition on a middle interval, with a density certificate rho = |x|^-6
/// filling the gap over four box strips around the annular region
/// A_2 \ B_1. The true dynamics contract globally (|x1| + |x2| decreases),
/// so the certificate gap is filled honestly rather than by construction of
/// a second attractor.
inline InterconnectionSpec gap() {
    const std::string rho = "(x1^2 + x2^2)^(-3)";
    const std::string q = "0.5*(x1^2 + x2^2)^(-3)";
    const auto xs = state_names(2);
    const double inner = 1.2;  // just inside B_1's threshold ~1.2615
    const double outer = 6.0;  // just outside A_2's threshold ~5.7385
    std::vector<DpiBlock> blocks;
    auto add = [&](double x1lo, double x1hi, double x2lo, double x2hi) {
        blocks.emplace_back(2, Expr::parse(rho, xs), Expr::parse(q, xs),
                            ComparisonFn::parse("s", FnClass::K, 1e7),
                            Box{{x1lo, x1hi}, {x2lo, x2hi}});
    };
    add(inner, outer, -outer, outer);    // right strip
    add(-outer, -inner, -outer, outer);  // left strip
    add(-outer, outer, inner, outer);    // top strip
    add(-outer, outer, -outer, -inner);  // bottom strip

    return InterconnectionSpec(
        1, 1, 1, 1,
        field1(2, 1,
               {"-x1 + 0.5*x2*(0.9 + 0.35*exp(-0.25*(abs(x2) - 3.5)^2)) + u1"}),
        field2(2, 1, 2, {"-x2 + 0.5*x1 + u2"}),
        StorageFn(Expr::parse("abs(x1)", {"x1"}), 1),
        StorageFn(Expr::parse("abs(x2)", {"x2"}), 1), kinf(gap_gamma12_text()), kinf("s"),
        kinf("4*s"), kinf("4*s"), kinf("0.25*s"), kinf("0.25*s"), std::move(blocks));
}

/// Cubic-by-linear field used for finite-difference fidelity checks;
/// div f = 1.5 - 3 x1^2 analytically.
inline InterconnectionSpec cubic_divergence(bool negated = false) {
    const char* f1 = negated ? "-(x1*(1 - x1^2))" : "x1*(1 - x1^2)";
    const char* f2 = negated ? "-0.5*x2" : "0.5*x2";
    return InterconnectionSpec(
        1, 1, 0, 0, field1(2, 0, {f1}), field2(2, 0, 0, {f2}),
        StorageFn(Expr::parse("abs(x1)", {"x1"}), 1),
        StorageFn(Expr::parse("abs(x2)", {"x2"}), 1), kinf("0.5*s"), kinf("0.5*s"),
        kinf("2*s"), kinf("2*s"), kinf("0.5*s"), kinf("0.5*s"), {});
}

}  // namespace fixtures
