#include "smallgain/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "smallgain/detail/rng.hpp"
#include "smallgain/kernels.hpp"
#include "smallgain/program.hpp"

namespace smallgain {

void CheckReport::record(const std::vector<double>& point, double lhs, double rhs,
                         double margin) {
    ++checked_points;
    min_margin = std::min(min_margin, margin);
    if (margin < 0.0) {
        ++violation_count;
        if (violations.size() < kMaxStoredViolations) {
            violations.push_back({point, lhs, rhs, margin});
        }
    }
}

CheckReport check_sgc_on_interval(const ComparisonFn& gamma12, const ComparisonFn& gamma21,
                                  std::pair<double, double> interval, std::size_t samples) {
    if (samples < 10) throw Error("check_sgc_on_interval requires at least 10 samples");
    const auto [lo, hi] = interval;
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
        throw Error("check_sgc_on_interval requires a finite interval (clip infinite "
                    "endpoints to a probe first)");
    }
    CheckReport report;
    report.name = "sgc";
    for (std::size_t i = 1; i <= samples; ++i) {
        const double s =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples + 1);
        const double composed = gamma12(gamma21(s));
        report.record({s}, composed, s, s - composed);
    }
    return report;
}

namespace {

// Column-major point storage: one contiguous array per coordinate axis.
struct Columns {
    std::vector<std::vector<double>> data;

    explicit Columns(std::size_t axes, std::size_t count)
        : data(axes, std::vector<double>(count)) {}

    std::size_t count() const { return data.empty() ? 0 : data.front().size(); }
    double* col(std::size_t a) { return data[a].data(); }
    const double* col(std::size_t a) const { return data[a].data(); }
};

/// Regular grid over a box in row-major order (last axis fastest).
Columns make_grid(const Box& box, const std::vector<std::size_t>& counts) {
    std::size_t total = 1;
    for (std::size_t c : counts) total *= c;
    Columns cols(box.size(), total);
    std::size_t repeat = total;
    for (std::size_t a = 0; a < box.size(); ++a) {
        const std::size_t c = counts[a];
        repeat /= c;
        const auto [lo, hi] = box[a];
        for (std::size_t p = 0; p < total; ++p) {
            const std::size_t idx = (p / repeat) % c;
            cols.col(a)[p] =
                c == 1 ? 0.5 * (lo + hi)
                       : lo + (hi - lo) * static_cast<double>(idx) / static_cast<double>(c - 1);
        }
    }
    return cols;
}

Columns sample_box(const Box& box, std::size_t count, std::uint64_t seed) {
    Columns cols(box.size(), count);
    std::mt19937_64 rng(seed);
    for (std::size_t p = 0; p < count; ++p) {
        for (std::size_t a = 0; a < box.size(); ++a) {
            std::uniform_real_distribution<double> dist(box[a].first, box[a].second);
            cols.col(a)[p] = dist(rng);
        }
    }
    return cols;
}

std::vector<const double*> pointers(const Columns& cols) {
    std::vector<const double*> ptrs(cols.data.size());
    for (std::size_t a = 0; a < ptrs.size(); ++a) ptrs[a] = cols.col(a);
    return ptrs;
}

void batch_norm(const std::vector<const double*>& comps, std::size_t count,
                std::vector<double>& out) {
    out.assign(count, 0.0);
    for (const double* c : comps) {
        for (std::size_t p = 0; p < count; ++p) out[p] += c[p] * c[p];
    }
    for (std::size_t p = 0; p < count; ++p) out[p] = std::sqrt(out[p]);
}

}  // namespace

CheckReport check_iss_lyapunov(const InterconnectionSpec& spec, int subsystem,
                               const LyapunovCheckParams& params) {
    if (subsystem != 1 && subsystem != 2) throw Error("subsystem must be 1 or 2");
    if (params.samples < 100) throw Error("check_iss_lyapunov requires >= 100 samples");
    if (params.x_box.size() != spec.n()) {
        throw DimensionMismatchError(spec.n(), params.x_box.size());
    }
    if (params.u_box.size() != spec.m()) {
        throw DimensionMismatchError(spec.m(), params.u_box.size());
    }

    const bool first = subsystem == 1;
    const std::size_t n = spec.n();
    const std::size_t own_off = first ? 0 : spec.n1();
    const std::size_t own_dim = first ? spec.n1() : spec.n2();
    const std::size_t other_off = first ? spec.n1() : 0;
    const std::size_t u_off = first ? 0 : spec.m1();
    const std::size_t u_dim = first ? spec.m1() : spec.m2();
    const StorageFn& v_own = first ? spec.v1() : spec.v2();
    const StorageFn& v_other = first ? spec.v2() : spec.v1();
    const ComparisonFn& gamma_ij = first ? spec.gamma12() : spec.gamma21();
    const ComparisonFn& gamma_ext = first ? spec.gamma1() : spec.gamma2();
    const ComparisonFn& alpha = first ? spec.alpha1() : spec.alpha2();
    const auto& field = first ? spec.f1_programs() : spec.f2_programs();

    const std::size_t count = params.samples;
    Box sample_space = params.x_box;
    for (std::size_t c = 0; c < u_dim; ++c) sample_space.push_back(params.u_box[u_off + c]);
    Columns pts = sample_box(sample_space, count, params.seed);

    Workspace ws;
    std::vector<std::uint8_t> bad(count, 0);

    auto eval_into = [&](const Program& prog, const std::vector<const double*>& vars,
                         std::vector<double>& out) {
        out.resize(count);
        prog.eval(vars, count, out.data(), ws, bad.data());
    };

    // Storage values and gain transforms.
    std::vector<const double*> own_vars(own_dim), other_vars(v_other.dim());
    for (std::size_t a = 0; a < own_dim; ++a) own_vars[a] = pts.col(own_off + a);
    for (std::size_t a = 0; a < v_other.dim(); ++a) other_vars[a] = pts.col(other_off + a);
    std::vector<double> v_own_vals, v_other_vals, gamma_other, gamma_input;
    eval_into(v_own.program(), own_vars, v_own_vals);
    eval_into(v_other.program(), other_vars, v_other_vals);
    {
        const double* p = v_other_vals.data();
        gamma_other.resize(count);
        gamma_ij.program().eval(std::span<const double* const>(&p, 1), count,
                                gamma_other.data(), ws, bad.data());
    }
    std::vector<double> u_norm;
    {
        std::vector<const double*> ucols(u_dim);
        for (std::size_t c = 0; c < u_dim; ++c) ucols[c] = pts.col(n + c);
        batch_norm(ucols, count, u_norm);
        const double* p = u_norm.data();
        gamma_input.resize(count);
        gamma_ext.program().eval(std::span<const double* const>(&p, 1), count,
                                 gamma_input.data(), ws, bad.data());
    }

    // Field components at the sampled points (schema: states, own inputs, t).
    std::vector<double> tzero(count, 0.0);
    std::vector<const double*> field_vars(n + u_dim + 1);
    for (std::size_t a = 0; a < n; ++a) field_vars[a] = pts.col(a);
    for (std::size_t c = 0; c < u_dim; ++c) field_vars[n + c] = pts.col(n + c);
    field_vars[n + u_dim] = tzero.data();
    std::vector<std::vector<double>> f_vals(own_dim);
    for (std::size_t c = 0; c < own_dim; ++c) eval_into(field[c], field_vars, f_vals[c]);

    // Gradient of V_i by central differences, with one-sided disagreement
    // flagging nondifferentiable points.
    std::vector<std::vector<double>> grad(own_dim);
    std::vector<std::uint8_t> nondiff(count, 0);
    std::vector<double> shifted(count), vplus(count), vminus(count), hsteps(count);
    for (std::size_t a = 0; a < own_dim; ++a) {
        const double* base = pts.col(own_off + a);
        for (std::size_t p = 0; p < count; ++p) {
            hsteps[p] = params.fd_step * std::max(1.0, std::fabs(base[p]));
        }
        std::vector<const double*> vars = own_vars;
        vars[a] = shifted.data();
        for (std::size_t p = 0; p < count; ++p) shifted[p] = base[p] + hsteps[p];
        v_own.program().eval(vars, count, vplus.data(), ws, bad.data());
        for (std::size_t p = 0; p < count; ++p) shifted[p] = base[p] - hsteps[p];
        v_own.program().eval(vars, count, vminus.data(), ws, bad.data());
        grad[a].resize(count);
        for (std::size_t p = 0; p < count; ++p) {
            grad[a][p] = (vplus[p] - vminus[p]) / (2.0 * hsteps[p]);
            const double fwd = (vplus[p] - v_own_vals[p]) / hsteps[p];
            const double bwd = (v_own_vals[p] - vminus[p]) / hsteps[p];
            if (std::fabs(fwd - bwd) > params.nondiff_tol) nondiff[p] = 1;
        }
    }

    // alpha_i(|x_i|).
    std::vector<double> x_norm, alpha_vals;
    batch_norm(own_vars, count, x_norm);
    {
        const double* p = x_norm.data();
        alpha_vals.resize(count);
        alpha.program().eval(std::span<const double* const>(&p, 1), count, alpha_vals.data(),
                             ws, bad.data());
    }

    CheckReport report;
    report.name = subsystem == 1 ? "iss_lyapunov_1" : "iss_lyapunov_2";
    std::size_t domain_skips = 0;
    std::vector<double> point(n + u_dim);
    for (std::size_t p = 0; p < count; ++p) {
        if (bad[p]) {
            ++domain_skips;
            ++report.skipped_points;
            continue;
        }
        const bool triggered =
            v_own_vals[p] >= std::max(gamma_other[p], gamma_input[p]);
        if (!triggered || nondiff[p]) {
            ++report.skipped_points;
            continue;
        }
        double derivative = 0.0;
        for (std::size_t c = 0; c < own_dim; ++c) derivative += grad[c][p] * f_vals[c][p];
        const double bound = -alpha_vals[p] + params.fd_slack;
        for (std::size_t a = 0; a < n + u_dim; ++a) point[a] = pts.col(a)[p];
        report.record(point, derivative, bound, bound - derivative);
    }
    if (domain_skips > 0) {
        report.notes.push_back(std::to_string(domain_skips) +
                               " point(s) skipped on expression domain errors");
    }
    return report;
}

CheckReport check_dpi(const InterconnectionSpec& spec, const DpiBlock& block,
                      const DpiCheckParams& params) {
    const std::size_t n = spec.n();
    if (params.grid.size() != n) throw DimensionMismatchError(n, params.grid.size());
    for (std::size_t c : params.grid) {
        if (c < 8) throw Error("check_dpi requires at least 8 grid points per axis");
    }

    Columns pts = make_grid(block.domain_box, params.grid);
    const std::size_t count = pts.count();
    Workspace ws;
    std::vector<std::uint8_t> bad(count, 0);

    std::vector<const double*> state_vars = pointers(pts);

    // Storage values for the trigger.
    std::vector<double> v1_vals(count), v2_vals(count);
    {
        std::vector<const double*> v1_vars(state_vars.begin(), state_vars.begin() + spec.n1());
        std::vector<const double*> v2_vars(state_vars.begin() + spec.n1(), state_vars.end());
        spec.v1().program().eval(v1_vars, count, v1_vals.data(), ws, bad.data());
        spec.v2().program().eval(v2_vars, count, v2_vals.data(), ws, bad.data());
    }

    std::vector<double> q_vals(count);
    block.q_program().eval(state_vars, count, q_vals.data(), ws, bad.data());

    CheckReport report;
    report.name = "dpi_k" + std::to_string(block.k);

    std::vector<double> tzero(count, 0.0);
    std::vector<double> shifted(count), hsteps(count);
    std::vector<double> rho_plus(count), rho_minus(count), f_plus(count), f_minus(count);
    std::vector<double> divergence(count);

    for (const std::vector<double>& u : params.u_values) {
        if (u.size() != spec.m()) {
            throw Error("check_dpi input values must have " + std::to_string(spec.m()) +
                        " components");
        }
        double u_norm = 0.0;
        for (double c : u) u_norm += c * c;
        u_norm = std::sqrt(u_norm);
        const double trigger_level = block.gamma_k(u_norm);

        std::vector<std::vector<double>> u_bufs(spec.m(), std::vector<double>(count));
        for (std::size_t c = 0; c < spec.m(); ++c) {
            kernels::active().fill(u[c], u_bufs[c].data(), count);
        }

        std::fill(divergence.begin(), divergence.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double* base = pts.col(j);
            for (std::size_t p = 0; p < count; ++p) {
                hsteps[p] = params.fd_step * std::max(1.0, std::fabs(base[p]));
            }

            const Program& fj = spec.field_program(j);
            const bool in_first = spec.component_in_first(j);
            const std::size_t u_lo = in_first ? 0 : spec.m1();
            const std::size_t u_hi = in_first ? spec.m1() : spec.m();

            std::vector<const double*> rho_vars = state_vars;
            std::vector<const double*> f_vars(state_vars.begin(), state_vars.end());
            for (std::size_t c = u_lo; c < u_hi; ++c) f_vars.push_back(u_bufs[c].data());
            f_vars.push_back(tzero.data());
            rho_vars[j] = shifted.data();
            f_vars[j] = shifted.data();

            for (std::size_t p = 0; p < count; ++p) shifted[p] = base[p] + hsteps[p];
            block.rho_program().eval(rho_vars, count, rho_plus.data(), ws, bad.data());
            fj.eval(f_vars, count, f_plus.data(), ws, bad.data());
            for (std::size_t p = 0; p < count; ++p) shifted[p] = base[p] - hsteps[p];
            block.rho_program().eval(rho_vars, count, rho_minus.data(), ws, bad.data());
            fj.eval(f_vars, count, f_minus.data(), ws, bad.data());

            for (std::size_t p = 0; p < count; ++p) {
                divergence[p] +=
                    (rho_plus[p] * f_plus[p] - rho_minus[p] * f_minus[p]) / (2.0 * hsteps[p]);
            }
        }

        std::size_t domain_skips = 0;
        std::vector<double> point(n + spec.m());
        for (std::size_t p = 0; p < count; ++p) {
            if (bad[p]) {
                ++domain_skips;
                ++report.skipped_points;
                continue;
            }
            if (std::max(v1_vals[p], v2_vals[p]) < trigger_level) {
                ++report.skipped_points;
                continue;
            }
            for (std::size_t a = 0; a < n; ++a) point[a] = pts.col(a)[p];
            for (std::size_t c = 0; c < spec.m(); ++c) point[n + c] = u[c];
            const double bound = q_vals[p] - params.fd_slack;
            report.record(point, divergence[p], bound, divergence[p] - bound);
        }
        if (domain_skips > 0) {
            report.notes.push_back(std::to_string(domain_skips) +
                                   " grid point(s) skipped on expression domain errors");
        }
    }
    return report;
}

CheckReport check_dpi_block_invariants(const InterconnectionSpec& spec, const DpiBlock& block,
                                       const std::vector<std::size_t>& grid) {
    Columns pts = make_grid(block.domain_box, grid);
    const std::size_t count = pts.count();
    Workspace ws;
    std::vector<std::uint8_t> bad(count, 0);
    std::vector<const double*> vars = pointers(pts);

    std::vector<double> rho_vals(count), q_vals(count);
    block.rho_program().eval(vars, count, rho_vals.data(), ws, bad.data());
    block.q_program().eval(vars, count, q_vals.data(), ws, bad.data());

    CheckReport report;
    report.name = "dpi_block_invariants_k" + std::to_string(block.k);
    const std::size_t n = spec.n();
    std::vector<double> point(n);
    std::size_t q_zero = 0;
    for (std::size_t p = 0; p < count; ++p) {
        if (bad[p]) {
            ++report.skipped_points;
            continue;
        }
        for (std::size_t a = 0; a < n; ++a) point[a] = pts.col(a)[p];
        // rho must be strictly positive; q nonnegative with q == 0 surfaced
        // as "almost everywhere" exceptions rather than violations.
        report.record(point, 0.0, rho_vals[p], rho_vals[p] > 0.0 ? rho_vals[p] : -1.0);
        report.record(point, 0.0, q_vals[p], q_vals[p]);
        if (q_vals[p] == 0.0) ++q_zero;
    }
    if (q_zero > 0) {
        report.notes.push_back(std::to_string(q_zero) +
                               " grid point(s) with q == 0 (allowed on a null set)");
    }
    return report;
}

CheckReport check_dpi_containment(const InterconnectionSpec& spec, std::size_t k,
                                  std::span<const Box> boxes,
                                  const std::optional<RegionSpec>& a_region,
                                  const std::optional<RegionSpec>& b_prev,
                                  std::size_t samples, double inflate, std::uint64_t seed) {
    if (inflate < 1.0) throw Error("containment inflation factor must be >= 1");
    if (boxes.empty()) throw Error("containment needs at least one domain box");
    const std::size_t n = spec.n();

    Box hull = boxes.front();
    for (const Box& b : boxes) {
        for (std::size_t a = 0; a < n; ++a) {
            hull[a].first = std::min(hull[a].first, b[a].first);
            hull[a].second = std::max(hull[a].second, b[a].second);
        }
    }
    Box big(n);
    for (std::size_t a = 0; a < n; ++a) {
        const double c = 0.5 * (hull[a].first + hull[a].second);
        const double w = 0.5 * (hull[a].second - hull[a].first);
        big[a] = {c - inflate * w, c + inflate * w};
    }
    Columns pts = sample_box(big, samples, seed);

    auto covered = [&](std::span<const double> x) {
        for (const Box& b : boxes) {
            bool inside = true;
            for (std::size_t a = 0; a < n && inside; ++a) {
                inside = x[a] >= b[a].first && x[a] <= b[a].second;
            }
            if (inside) return true;
        }
        return false;
    };
    auto excess_of = [&](std::span<const double> x) {
        double best = std::numeric_limits<double>::infinity();
        for (const Box& b : boxes) {
            double e = 0.0;
            for (std::size_t a = 0; a < n; ++a) {
                e = std::max(e, b[a].first - x[a]);
                e = std::max(e, x[a] - b[a].second);
            }
            best = std::min(best, e);
        }
        return best;
    };

    CheckReport report;
    report.name = "dpi_containment_k" + std::to_string(k);
    std::vector<double> x(n);
    for (std::size_t p = 0; p < samples; ++p) {
        for (std::size_t a = 0; a < n; ++a) x[a] = pts.col(a)[p];
        const bool in_a = !a_region || in_a_region(*a_region, spec.v1(), spec.v2(), x);
        const bool in_b = b_prev && in_b_region(*b_prev, spec.v1(), spec.v2(), x);
        if (!in_a || in_b) {
            ++report.skipped_points;
            continue;
        }
        const double excess = covered(x) ? 0.0 : excess_of(x);
        report.record(x, excess, 0.0, -excess);
    }
    report.notes.push_back("sampled containment of {A_k \\ B_{k-1}} in the union of " +
                           std::to_string(boxes.size()) + " block box(es); inflation factor " +
                           std::to_string(inflate));
    return report;
}

}  // namespace smallgain
