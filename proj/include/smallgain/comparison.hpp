#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/expr.hpp"
#include "smallgain/program.hpp"

namespace smallgain {

/// Claimed comparison-function class. K: continuous, strictly increasing,
/// zero at zero. K-infinity additionally unbounded.
enum class FnClass { K, KInf };

/// Upper bound for bracket expansion during numerical inversion; a target
/// above g(kOverflowGuard) is reported Unreachable.
inline constexpr double kOverflowGuard = 1e12;

/// Default relative tolerance for numerical inversion.
inline constexpr double kInvertTol = 1e-9;

/// A scalar comparison function given as an expression over {s}.
///
/// Construction only compiles the body; class membership is checked
/// separately by validate_kinf (sample-based, never a proof). Immutable and
/// safe for concurrent evaluation.
class ComparisonFn {
public:
    ComparisonFn(Expr body, FnClass claimed_class, double s_max);

    static ComparisonFn parse(std::string_view text, FnClass claimed_class, double s_max);

    /// Evaluate at s >= 0.
    double operator()(double s) const;

    const Expr& body() const { return body_; }
    const Program& program() const { return program_; }
    FnClass claimed_class() const { return claimed_class_; }
    double s_max() const { return s_max_; }

    /// Threshold for the heuristic unboundedness probe; defaults to
    /// 1e6 * g(1) when unset.
    std::optional<double> probe_threshold() const { return probe_threshold_; }
    void set_probe_threshold(double t) { probe_threshold_ = t; }

private:
    Expr body_;
    Program program_;
    FnClass claimed_class_;
    double s_max_;
    std::optional<double> probe_threshold_;
};

double evaluate(const ComparisonFn& g, double s);

/// Solve g(x) = y for a validated strictly increasing g by bracket expansion
/// (hi doubling from 1, capped at kOverflowGuard) followed by bisection until
/// |g(x) - y| <= tol * max(1, y). Throws UnreachableError when y exceeds
/// g(kOverflowGuard).
double invert(const ComparisonFn& g, double y, double tol = kInvertTol);

/// s -> g(h(s)). K-infinity when both factors are.
ComparisonFn compose(const ComparisonFn& g, const ComparisonFn& h);

struct ValidationIssue {
    std::string kind;  // "zero_at_zero" | "strict_increase" | "unboundedness"
    double s_lo = 0.0;
    double s_hi = 0.0;
    double g_lo = 0.0;
    double g_hi = 0.0;
};

struct ValidationReport {
    bool passed = false;
    bool zero_at_zero_ok = false;
    bool strictly_increasing_ok = false;
    bool unboundedness_ok = true;     // heuristic check, K-infinity claims only
    bool unboundedness_checked = false;
    double g_at_zero = 0.0;
    double g_at_s_max = 0.0;
    double probe_threshold = 0.0;
    double s_max = 0.0;
    std::size_t grid_points = 0;
    std::vector<ValidationIssue> violations;
};

/// Sample-based class check: g(0) ~ 0, strict increase over a mixed
/// geometric+linear grid on (0, s_max], and (for claimed K-infinity) the
/// unboundedness probe g(s_max) > threshold. Failures become report entries,
/// never exceptions. grid_points must be >= 100.
ValidationReport validate_kinf(const ComparisonFn& g, std::size_t grid_points, double s_max);

/// Convenience overload using the function's own validation domain.
ValidationReport validate_kinf(const ComparisonFn& g, std::size_t grid_points = 512);

/// The averaged separator sigma(r) = (gamma12^-1(r) + gamma21(r)) / 2 sitting
/// strictly between the two gain graphs on every small-gain interval.
class SigmaFn {
public:
    SigmaFn(ComparisonFn gamma12, ComparisonFn gamma21, double invert_tol = kInvertTol);

    double operator()(double r) const;

    /// gamma12^-1(r) by numerical inversion.
    double gamma12_inv(double r) const;

    const ComparisonFn& gamma12() const { return gamma12_; }
    const ComparisonFn& gamma21() const { return gamma21_; }
    double invert_tol() const { return invert_tol_; }

private:
    ComparisonFn gamma12_;
    ComparisonFn gamma21_;
    double invert_tol_;
};

SigmaFn make_sigma(const ComparisonFn& gamma12, const ComparisonFn& gamma21,
                   double invert_tol = kInvertTol);

}  // namespace smallgain
