#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "smallgain/comparison.hpp"

namespace smallgain {

/// Knobs for the interval-location algorithm.
struct AlgorithmParams {
    double delta = 1e-2;             // probe step
    double eps_fix = 1e-9;           // relative band for the fixed-point trichotomy
    double eps_conv = 1e-10;         // relative convergence tolerance of inner iterations
    double s_divergence = 1e9;       // iterates above this are declared infinite
    std::size_t max_inner_iters = 10000;
    std::size_t max_outer_iters = 1000;

    void validate() const;           // positivity, eps_fix >= eps_conv
};

enum class PointClass { Below, Above, Fixed };

/// Trichotomy of gamma(s) vs s with a numerical equality band of width
/// eps_fix * max(1, s).
PointClass classify_point(const ComparisonFn& gamma, double s, double eps_fix);

struct FixedPointResult {
    bool infinite = false;     // iterates exceeded s_divergence (or left the reals)
    double value = 0.0;        // last iterate when finite
    std::size_t iterations = 0;
    bool converged = false;    // met eps_conv before max_inner_iters
    std::size_t monotonicity_violations = 0;  // steps breaking the initial direction
};

/// Iterate s <- gamma(s) from s0 until the step shrinks below
/// eps_conv * max(1, s), the iterate exceeds s_divergence (Infinite), or
/// max_inner_iters is hit (finite but flagged unconverged). The sequence is
/// expected monotone; violations of the direction set by the first step are
/// counted, not fatal. An UnreachableError from `gamma` (inverse iterations)
/// is converted to an Infinite result.
FixedPointResult fixed_point_limit(const std::function<double(double)>& gamma, double s0,
                                   const AlgorithmParams& params);

FixedPointResult fixed_point_limit(const ComparisonFn& gamma, double s0,
                                   const AlgorithmParams& params);

enum class Termination { UpperInfinite, DivergentAbove, OuterCap };

struct SmallGainInterval {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    bool upper_infinite() const { return std::isinf(upper); }
};

struct IntervalDiagnostics {
    struct PerInterval {
        std::size_t lower_iters = 0;
        std::size_t upper_iters = 0;
        bool lower_converged = false;
        bool upper_converged = false;  // meaningless when upper endpoint is infinite
        std::size_t monotonicity_violations = 0;
    };
    std::vector<PerInterval> per_interval;
    std::size_t outer_iterations = 0;
    std::size_t fixed_advances = 0;  // Step-3 traversals of fixed-point continua
    std::size_t above_runs = 0;      // Above-branch climbs between intervals
};

/// Ordered small-gain intervals (M_k lower, M_k upper); the last upper
/// endpoint may be infinite. ell() == number of intervals actually located.
struct SmallGainIntervals {
    std::vector<SmallGainInterval> intervals;
    Termination terminated_by = Termination::OuterCap;
    IntervalDiagnostics diagnostics;
    bool any_unconverged = false;

    std::size_t ell() const { return intervals.size(); }
};

/// Locate small-gain intervals of gamma = gamma12 o gamma21 by monotone
/// fixed-point iteration: probe s* = s + delta, classify, then follow the
/// iteration of gamma (and of gamma^-1 = gamma21^-1 o gamma12^-1, realized by
/// numerical inversion) to the enclosing intersection points. The outer loop
/// is capped at max_outer_iters for gain pairs with unboundedly many
/// intersections.
SmallGainIntervals find_intervals(const ComparisonFn& gamma12, const ComparisonFn& gamma21,
                                  const AlgorithmParams& params);

/// Test oracle: dense scan of sign(gamma(s) - s) over n uniform points of
/// (0, s_max]; maximal negative runs become intervals with endpoints
/// bracketed to grid resolution. An interval reaching the scan bound is
/// reported with upper == s_max.
std::vector<std::pair<double, double>> brute_force_intervals(const ComparisonFn& gamma,
                                                             double s_max, std::size_t n);

}  // namespace smallgain
