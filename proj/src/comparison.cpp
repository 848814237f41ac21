#include "smallgain/comparison.hpp"

#include <algorithm>
#include <cmath>

namespace smallgain {

ComparisonFn::ComparisonFn(Expr body, FnClass claimed_class, double s_max)
    : body_(std::move(body)), program_(body_), claimed_class_(claimed_class), s_max_(s_max) {
    if (body_.variables().size() != 1) {
        throw Error("comparison function must be an expression over a single variable");
    }
    if (!(s_max_ > 0.0)) {
        throw Error("comparison function validation domain requires s_max > 0");
    }
}

ComparisonFn ComparisonFn::parse(std::string_view text, FnClass claimed_class, double s_max) {
    return ComparisonFn(Expr::parse(text, {"s"}), claimed_class, s_max);
}

double ComparisonFn::operator()(double s) const {
    if (s < 0.0) throw Error("comparison function argument must be nonnegative");
    return program_.eval1(std::span<const double>(&s, 1));
}

double evaluate(const ComparisonFn& g, double s) { return g(s); }

double invert(const ComparisonFn& g, double y, double tol) {
    if (y < 0.0) throw Error("inversion target must be nonnegative");
    if (tol <= 0.0) throw Error("inversion tolerance must be positive");
    if (y == 0.0) return 0.0;

    const double band = tol * std::max(1.0, y);
    double hi = 1.0;
    if (g(hi) < y) {
        while (hi < kOverflowGuard && g(hi) < y) {
            hi = std::min(hi * 2.0, kOverflowGuard);
        }
        if (g(hi) < y) throw UnreachableError(y);
    }

    double lo = 0.0;
    double mid = hi;
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::fabs(gm - y) <= band) return mid;
        if (gm < y) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-17 * std::max(1.0, lo)) break;
    }
    return mid;
}

ComparisonFn compose(const ComparisonFn& g, const ComparisonFn& h) {
    Expr composed = g.body().substituted(0, h.body());
    FnClass cls = (g.claimed_class() == FnClass::KInf && h.claimed_class() == FnClass::KInf)
                      ? FnClass::KInf
                      : FnClass::K;
    return ComparisonFn(std::move(composed), cls, h.s_max());
}

ValidationReport validate_kinf(const ComparisonFn& g, std::size_t grid_points, double s_max) {
    if (grid_points < 100) throw Error("validate_kinf requires at least 100 grid points");
    if (!(s_max > 0.0)) throw Error("validate_kinf requires s_max > 0");

    ValidationReport report;
    report.s_max = s_max;
    report.grid_points = grid_points;

    report.g_at_zero = g(0.0);
    report.zero_at_zero_ok = std::fabs(report.g_at_zero) <= 1e-9;
    if (!report.zero_at_zero_ok) {
        report.violations.push_back({"zero_at_zero", 0.0, 0.0, report.g_at_zero, 0.0});
    }

    // Mixed grid: geometric half resolves behavior near 0, linear half covers
    // the bulk of (0, s_max].
    std::vector<double> grid;
    grid.reserve(grid_points + 1);
    const std::size_t half = grid_points / 2;
    const double geo_lo = s_max * 1e-9;
    const double ratio = std::pow(s_max / geo_lo, 1.0 / static_cast<double>(half - 1));
    double s = geo_lo;
    for (std::size_t i = 0; i < half; ++i) {
        grid.push_back(std::min(s, s_max));
        s *= ratio;
    }
    for (std::size_t i = 1; i <= grid_points - half; ++i) {
        grid.push_back(s_max * static_cast<double>(i) / static_cast<double>(grid_points - half));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    report.strictly_increasing_ok = true;
    double prev_s = 0.0;
    double prev_g = report.g_at_zero;
    for (double si : grid) {
        const double gi = g(si);
        if (!(gi > prev_g)) {
            report.strictly_increasing_ok = false;
            report.violations.push_back({"strict_increase", prev_s, si, prev_g, gi});
        }
        prev_s = si;
        prev_g = gi;
    }

    report.g_at_s_max = g(s_max);
    if (g.claimed_class() == FnClass::KInf) {
        report.unboundedness_checked = true;
        report.probe_threshold =
            g.probe_threshold() ? *g.probe_threshold() : 1e6 * g(1.0);
        report.unboundedness_ok = report.g_at_s_max > report.probe_threshold;
        if (!report.unboundedness_ok) {
            report.violations.push_back(
                {"unboundedness", s_max, s_max, report.g_at_s_max, report.probe_threshold});
        }
    }

    report.passed = report.zero_at_zero_ok && report.strictly_increasing_ok &&
                    report.unboundedness_ok;
    return report;
}

ValidationReport validate_kinf(const ComparisonFn& g, std::size_t grid_points) {
    return validate_kinf(g, grid_points, g.s_max());
}

SigmaFn::SigmaFn(ComparisonFn gamma12, ComparisonFn gamma21, double invert_tol)
    : gamma12_(std::move(gamma12)), gamma21_(std::move(gamma21)), invert_tol_(invert_tol) {}

double SigmaFn::gamma12_inv(double r) const { return invert(gamma12_, r, invert_tol_); }

double SigmaFn::operator()(double r) const {
    return 0.5 * (gamma12_inv(r) + gamma21_(r));
}

SigmaFn make_sigma(const ComparisonFn& gamma12, const ComparisonFn& gamma21,
                   double invert_tol) {
    return SigmaFn(gamma12, gamma21, invert_tol);
}

}  // namespace smallgain
