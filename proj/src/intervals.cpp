#include "smallgain/intervals.hpp"

#include <algorithm>
#include <cmath>

#include "smallgain/program.hpp"

namespace smallgain {

void AlgorithmParams::validate() const {
    if (!(delta > 0.0)) throw Error("algorithm delta must be positive");
    if (!(eps_fix > 0.0)) throw Error("algorithm eps_fix must be positive");
    if (!(eps_conv > 0.0)) throw Error("algorithm eps_conv must be positive");
    if (!(s_divergence > 0.0)) throw Error("algorithm s_divergence must be positive");
    if (eps_fix < eps_conv) throw Error("algorithm requires eps_fix >= eps_conv");
    if (max_inner_iters == 0 || max_outer_iters == 0) {
        throw Error("algorithm iteration caps must be positive");
    }
}

PointClass classify_point(const ComparisonFn& gamma, double s, double eps_fix) {
    if (!(s > 0.0)) throw Error("classify_point requires s > 0");
    const double band = eps_fix * std::max(1.0, s);
    const double g = gamma(s);
    if (std::fabs(g - s) <= band) return PointClass::Fixed;
    return g < s - band ? PointClass::Below : PointClass::Above;
}

FixedPointResult fixed_point_limit(const std::function<double(double)>& gamma, double s0,
                                   const AlgorithmParams& params) {
    FixedPointResult res;
    double s = s0;
    int direction = 0;  // set by the first step: -1 decreasing, +1 increasing
    for (std::size_t n = 0; n < params.max_inner_iters; ++n) {
        if (!std::isfinite(s) || s > params.s_divergence) {
            res.infinite = true;
            res.iterations = n;
            return res;
        }
        double next;
        try {
            next = gamma(s);
        } catch (const UnreachableError&) {
            res.infinite = true;
            res.iterations = n;
            return res;
        }
        ++res.iterations;
        const double step = next - s;
        if (direction == 0 && step != 0.0) {
            direction = step > 0.0 ? 1 : -1;
        } else if ((direction > 0 && step < 0.0) || (direction < 0 && step > 0.0)) {
            ++res.monotonicity_violations;
        }
        if (std::fabs(step) <= params.eps_conv * std::max(1.0, std::fabs(s))) {
            res.value = next;
            res.converged = true;
            return res;
        }
        s = next;
    }
    if (!std::isfinite(s) || s > params.s_divergence) {
        res.infinite = true;
        return res;
    }
    res.value = s;
    res.converged = false;  // cap reached; caller flags the result
    return res;
}

FixedPointResult fixed_point_limit(const ComparisonFn& gamma, double s0,
                                   const AlgorithmParams& params) {
    return fixed_point_limit([&gamma](double s) { return gamma(s); }, s0, params);
}

SmallGainIntervals find_intervals(const ComparisonFn& gamma12, const ComparisonFn& gamma21,
                                  const AlgorithmParams& params) {
    params.validate();

    const ComparisonFn gamma = compose(gamma12, gamma21);
    // Inversions need to track the iteration accurately; one decade below
    // eps_conv keeps the inverse fixed points within the convergence band.
    const double inv_tol = std::max(0.1 * params.eps_conv, 1e-13);
    auto gamma_fwd = [&gamma](double s) { return gamma(s); };
    auto gamma_inv = [&](double s) {
        return invert(gamma21, invert(gamma12, s, inv_tol), inv_tol);
    };

    SmallGainIntervals out;
    double s = 0.0;
    while (out.diagnostics.outer_iterations < params.max_outer_iters) {
        ++out.diagnostics.outer_iterations;
        const double s_star = s + params.delta;
        switch (classify_point(gamma, s_star, params.eps_fix)) {
            case PointClass::Fixed:
                // Step 3: traverse a continuum of intersection points at pace delta.
                ++out.diagnostics.fixed_advances;
                s = s_star;
                break;
            case PointClass::Below: {
                // Steps 4-6: the iteration of gamma descends to the lower
                // endpoint, the iteration of gamma^-1 climbs to the upper one.
                FixedPointResult lower = fixed_point_limit(gamma_fwd, s_star, params);
                FixedPointResult upper = fixed_point_limit(gamma_inv, s_star, params);
                IntervalDiagnostics::PerInterval diag;
                diag.lower_iters = lower.iterations;
                diag.upper_iters = upper.iterations;
                diag.lower_converged = lower.converged;
                diag.upper_converged = upper.infinite || upper.converged;
                diag.monotonicity_violations =
                    lower.monotonicity_violations + upper.monotonicity_violations;
                out.diagnostics.per_interval.push_back(diag);
                if (!lower.converged || (!upper.infinite && !upper.converged)) {
                    out.any_unconverged = true;
                }
                SmallGainInterval interval;
                interval.lower = lower.infinite ? 0.0 : lower.value;
                interval.upper = upper.infinite ? std::numeric_limits<double>::infinity()
                                                : upper.value;
                out.intervals.push_back(interval);
                if (upper.infinite) {
                    out.terminated_by = Termination::UpperInfinite;
                    return out;
                }
                s = upper.value;
                break;
            }
            case PointClass::Above: {
                // Steps 7-9: climb to the next intersection point, or stop if
                // the iterates are unbounded.
                ++out.diagnostics.above_runs;
                FixedPointResult climb = fixed_point_limit(gamma_fwd, s_star, params);
                if (climb.infinite) {
                    out.terminated_by = Termination::DivergentAbove;
                    return out;
                }
                if (!climb.converged) out.any_unconverged = true;
                s = climb.value;
                break;
            }
        }
    }
    out.terminated_by = Termination::OuterCap;
    return out;
}

std::vector<std::pair<double, double>> brute_force_intervals(const ComparisonFn& gamma,
                                                             double s_max, std::size_t n) {
    if (n < 10000) throw Error("brute_force_intervals requires n >= 1e4");
    if (!(s_max > 0.0)) throw Error("brute_force_intervals requires s_max > 0");

    std::vector<std::pair<double, double>> runs;
    const std::size_t chunk = 1 << 16;
    std::vector<double> svals(chunk);
    std::vector<double> gvals(chunk);
    Workspace ws;
    const Program& prog = gamma.program();

    bool in_run = false;
    double run_lo = 0.0;
    double prev_s = 0.0;
    for (std::size_t base = 1; base <= n; base += chunk) {
        const std::size_t count = std::min(chunk, n - base + 1);
        for (std::size_t i = 0; i < count; ++i) {
            svals[i] = s_max * static_cast<double>(base + i) / static_cast<double>(n);
        }
        const double* sp = svals.data();
        prog.eval(std::span<const double* const>(&sp, 1), count, gvals.data(), ws);
        for (std::size_t i = 0; i < count; ++i) {
            const bool negative = gvals[i] - svals[i] < 0.0;
            if (negative && !in_run) {
                in_run = true;
                run_lo = prev_s;  // last non-negative point (0 before the first)
            } else if (!negative && in_run) {
                in_run = false;
                runs.emplace_back(run_lo, svals[i]);
            }
            prev_s = svals[i];
        }
    }
    if (in_run) runs.emplace_back(run_lo, s_max);
    return runs;
}

}  // namespace smallgain
