#include "smallgain/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <ostream>
#include <random>

#include "smallgain/detail/rng.hpp"
#include "smallgain/kernels.hpp"
#include "smallgain/program.hpp"

namespace smallgain {

namespace {

double norm2_of(std::span<const double> v) {
    double acc = 0.0;
    for (double c : v) acc += c * c;
    return std::sqrt(acc);
}

double uniform01(std::uint64_t& state) {
    return static_cast<double>(detail::splitmix64(state) >> 11) * 0x1.0p-53;
}

}  // namespace

InputSignal InputSignal::zero(std::size_t m) {
    InputSignal s;
    s.kind_ = InputKind::Zero;
    s.dim_ = m;
    s.sup_norm_ = 0.0;
    return s;
}

InputSignal InputSignal::constant(std::vector<double> levels) {
    InputSignal s;
    s.kind_ = InputKind::Constant;
    s.dim_ = levels.size();
    s.values_ = std::move(levels);
    double acc = 0.0;
    for (double c : s.values_) acc += c * c;
    s.sup_norm_ = std::sqrt(acc);
    return s;
}

InputSignal InputSignal::sinusoid(std::vector<double> amplitude, double frequency,
                                  double phase) {
    InputSignal s;
    s.kind_ = InputKind::Sinusoid;
    s.dim_ = amplitude.size();
    s.values_ = std::move(amplitude);
    s.frequency_ = frequency;
    s.phase_ = phase;
    double acc = 0.0;
    for (double c : s.values_) acc += c * c;
    s.sup_norm_ = std::sqrt(acc);  // components share phase, peaks align
    return s;
}

InputSignal InputSignal::piecewise_constant_random(double amplitude, double dwell,
                                                   std::uint64_t seed, std::size_t m) {
    if (!(dwell > 0.0)) throw Error("piecewise-constant input needs dwell > 0");
    if (amplitude < 0.0) throw Error("piecewise-constant input needs amplitude >= 0");
    InputSignal s;
    s.kind_ = InputKind::PiecewiseConstantRandom;
    s.dim_ = m;
    s.amplitude_ = amplitude;
    s.dwell_ = dwell;
    s.seed_ = seed;
    s.sup_norm_ = amplitude;
    return s;
}

void InputSignal::sample(double t, std::span<double> out) const {
    if (out.size() != dim_) throw DimensionMismatchError(dim_, out.size());
    switch (kind_) {
        case InputKind::Zero:
            std::fill(out.begin(), out.end(), 0.0);
            return;
        case InputKind::Constant:
            std::copy(values_.begin(), values_.end(), out.begin());
            return;
        case InputKind::Sinusoid: {
            const double v = std::sin(2.0 * M_PI * frequency_ * t + phase_);
            for (std::size_t c = 0; c < dim_; ++c) out[c] = values_[c] * v;
            return;
        }
        case InputKind::PiecewiseConstantRandom: {
            if (dim_ == 0) return;
            const std::uint64_t window =
                t <= 0.0 ? 0 : static_cast<std::uint64_t>(std::floor(t / dwell_));
            std::uint64_t state = detail::derive_seed(seed_, window, 0x9C27);
            // Uniform in the L2 ball of radius amplitude: rejection from the
            // cube, falling back to projection after 64 tries.
            for (int attempt = 0; attempt < 64; ++attempt) {
                double acc = 0.0;
                for (std::size_t c = 0; c < dim_; ++c) {
                    out[c] = amplitude_ * (2.0 * uniform01(state) - 1.0);
                    acc += out[c] * out[c];
                }
                if (acc <= amplitude_ * amplitude_) return;
            }
            const double norm = norm2_of(out);
            if (norm > 0.0) {
                for (std::size_t c = 0; c < dim_; ++c) out[c] *= amplitude_ / norm;
            }
            return;
        }
    }
}

std::string InputSignal::describe() const {
    switch (kind_) {
        case InputKind::Zero: return "zero";
        case InputKind::Constant: return "constant";
        case InputKind::Sinusoid: return "sinusoid";
        case InputKind::PiecewiseConstantRandom: return "piecewise_constant_random";
    }
    return "?";
}

namespace {

constexpr std::size_t kAlive = static_cast<std::size_t>(-1);

struct EnsembleRaw {
    std::size_t steps = 0;                 // K; the grid has K+1 indices
    std::vector<std::size_t> trunc_step;   // first invalid grid index, kAlive if none
    std::vector<double> tail_max;          // per lane, over the tail window
    std::vector<std::uint8_t> escaped;     // left the tracked region at some index
    std::vector<std::size_t> snapshot_indices;
    std::vector<double> snapshots;         // lane-major: lane * (S*n) + s*n + j
};

using StepRecorder =
    std::function<void(std::size_t idx, const std::vector<std::vector<double>>& cols)>;

/// Batched fixed-step RK4 over `lanes` independent initial conditions and
/// input signals, structure-of-arrays, one inner kernel call per state
/// component. Lanes that blow up or hit an expression domain error freeze at
/// their last valid state and are reported via trunc_step.
EnsembleRaw run_ensemble(const InterconnectionSpec& spec, std::span<const double> x0_flat,
                         std::span<const InputSignal> signals, double t_end, double h,
                         double blowup_threshold, double tail_fraction,
                         const RegionSpec* track_region, std::size_t snapshot_count,
                         const StepRecorder& recorder = {}) {
    if (!(h > 0.0)) throw Error("integration step must be positive");
    if (t_end < h) throw Error("t_end must be at least one step");
    const std::size_t n = spec.n();
    const std::size_t m = spec.m();
    const std::size_t lanes = signals.size();
    if (x0_flat.size() != lanes * n) throw DimensionMismatchError(lanes * n, x0_flat.size());
    for (const InputSignal& s : signals) {
        if (s.dim() != m) throw DimensionMismatchError(m, s.dim());
    }

    const std::size_t steps = static_cast<std::size_t>(std::llround(t_end / h));
    if (steps == 0) throw Error("t_end must be at least one step");
    const std::size_t grid_count = steps + 1;
    const std::size_t tail_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(grid_count))));
    const std::size_t tail_start = grid_count - tail_count;

    EnsembleRaw out;
    out.steps = steps;
    out.trunc_step.assign(lanes, kAlive);
    out.tail_max.assign(lanes, 0.0);
    out.escaped.assign(lanes, 0);
    if (snapshot_count > 0) {
        const std::size_t s_count = std::min(snapshot_count, tail_count);
        for (std::size_t s = 0; s < s_count; ++s) {
            const std::size_t idx =
                s_count == 1 ? grid_count - 1
                             : tail_start + (tail_count - 1) * s / (s_count - 1);
            out.snapshot_indices.push_back(idx);
        }
        out.snapshot_indices.erase(
            std::unique(out.snapshot_indices.begin(), out.snapshot_indices.end()),
            out.snapshot_indices.end());
        out.snapshots.assign(lanes * out.snapshot_indices.size() * n, 0.0);
    }

    const auto& kt = kernels::active();
    auto make_cols = [&](std::size_t count) {
        return std::vector<std::vector<double>>(count, std::vector<double>(lanes));
    };
    std::vector<std::vector<double>> x = make_cols(n), xs = make_cols(n);
    std::vector<std::vector<double>> k1 = make_cols(n), k2 = make_cols(n), k3 = make_cols(n),
                                     k4 = make_cols(n);
    std::vector<std::vector<double>> u_t = make_cols(m), u_mid = make_cols(m),
                                     u_end = make_cols(m);
    std::vector<double> tbuf(lanes);
    std::vector<double> prev(n * lanes);   // pre-step states for freezing
    std::vector<double> frozen(n * lanes); // last valid state of truncated lanes
    std::vector<std::uint8_t> bad(lanes);
    Workspace ws;

    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t l = 0; l < lanes; ++l) x[j][l] = x0_flat[l * n + j];
    }

    std::vector<double> utmp(m);
    auto sample_inputs = [&](double t, std::vector<std::vector<double>>& into) {
        for (std::size_t l = 0; l < lanes; ++l) {
            signals[l].sample(t, utmp);
            for (std::size_t c = 0; c < m; ++c) into[c][l] = utmp[c];
        }
    };

    std::vector<const double*> vars1(n + spec.m1() + 1), vars2(n + spec.m2() + 1);
    auto eval_field = [&](const std::vector<std::vector<double>>& state,
                          const std::vector<std::vector<double>>& u, const double* tptr,
                          std::vector<std::vector<double>>& into) {
        for (std::size_t a = 0; a < n; ++a) {
            vars1[a] = state[a].data();
            vars2[a] = state[a].data();
        }
        for (std::size_t c = 0; c < spec.m1(); ++c) vars1[n + c] = u[c].data();
        for (std::size_t c = 0; c < spec.m2(); ++c) vars2[n + c] = u[spec.m1() + c].data();
        vars1[n + spec.m1()] = tptr;
        vars2[n + spec.m2()] = tptr;
        for (std::size_t j = 0; j < spec.n1(); ++j) {
            spec.f1_programs()[j].eval(vars1, lanes, into[j].data(), ws, bad.data());
        }
        for (std::size_t j = 0; j < spec.n2(); ++j) {
            spec.f2_programs()[j].eval(vars2, lanes, into[spec.n1() + j].data(), ws,
                                       bad.data());
        }
    };

    std::vector<const double*> v1_vars(spec.n1()), v2_vars(spec.n2());
    std::vector<double> v1_vals(lanes), v2_vals(lanes);
    auto observe = [&](std::size_t idx) {
        // Per-lane norms for blowup detection and the limsup tail.
        for (std::size_t l = 0; l < lanes; ++l) tbuf[l] = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double* col = x[j].data();
            for (std::size_t l = 0; l < lanes; ++l) tbuf[l] += col[l] * col[l];
        }
        for (std::size_t l = 0; l < lanes; ++l) {
            if (out.trunc_step[l] != kAlive) continue;
            const double norm2 = tbuf[l];
            if (!std::isfinite(norm2) || norm2 > blowup_threshold * blowup_threshold) {
                out.trunc_step[l] = idx;
                for (std::size_t j = 0; j < n; ++j) {
                    frozen[j * lanes + l] = prev[j * lanes + l];
                    x[j][l] = prev[j * lanes + l];
                }
                continue;
            }
            if (idx >= tail_start) {
                out.tail_max[l] = std::max(out.tail_max[l], std::sqrt(norm2));
            }
        }
        if (track_region != nullptr && !track_region->b_infinite) {
            for (std::size_t a = 0; a < spec.n1(); ++a) v1_vars[a] = x[a].data();
            for (std::size_t a = 0; a < spec.n2(); ++a) v2_vars[a] = x[spec.n1() + a].data();
            spec.v1().program().eval(v1_vars, lanes, v1_vals.data(), ws, bad.data());
            spec.v2().program().eval(v2_vars, lanes, v2_vals.data(), ws, bad.data());
            const double b1 = track_region->b_threshold_v1;
            const double b2 = track_region->b_threshold_v2;
            const double s1 = b1 + 1e-9 * std::max(1.0, b1);
            const double s2 = b2 + 1e-9 * std::max(1.0, b2);
            for (std::size_t l = 0; l < lanes; ++l) {
                if (out.trunc_step[l] == kAlive && (v1_vals[l] > s1 || v2_vals[l] > s2)) {
                    out.escaped[l] = 1;
                }
            }
        }
        if (!out.snapshot_indices.empty()) {
            auto it = std::find(out.snapshot_indices.begin(), out.snapshot_indices.end(), idx);
            if (it != out.snapshot_indices.end()) {
                const std::size_t s = static_cast<std::size_t>(
                    std::distance(out.snapshot_indices.begin(), it));
                const std::size_t stride = out.snapshot_indices.size() * n;
                for (std::size_t l = 0; l < lanes; ++l) {
                    for (std::size_t j = 0; j < n; ++j) {
                        out.snapshots[l * stride + s * n + j] = x[j][l];
                    }
                }
            }
        }
        if (recorder) recorder(idx, x);
    };

    for (std::size_t j = 0; j < n; ++j) {
        std::memcpy(prev.data() + j * lanes, x[j].data(), lanes * sizeof(double));
    }
    observe(0);

    for (std::size_t i = 0; i < steps; ++i) {
        bool any_alive = false;
        for (std::size_t l = 0; l < lanes; ++l) {
            if (out.trunc_step[l] == kAlive) {
                any_alive = true;
                break;
            }
        }
        if (!any_alive) break;

        const double t = h * static_cast<double>(i);
        const double t_mid = t + 0.5 * h;
        const double t_next = h * static_cast<double>(i + 1);
        std::fill(bad.begin(), bad.end(), 0);
        for (std::size_t j = 0; j < n; ++j) {
            std::memcpy(prev.data() + j * lanes, x[j].data(), lanes * sizeof(double));
        }

        sample_inputs(t, u_t);
        sample_inputs(t_mid, u_mid);
        sample_inputs(t_next, u_end);

        kt.fill(t, tbuf.data(), lanes);
        eval_field(x, u_t, tbuf.data(), k1);
        for (std::size_t j = 0; j < n; ++j) {
            kt.axpy(0.5 * h, x[j].data(), k1[j].data(), xs[j].data(), lanes);
        }
        kt.fill(t_mid, tbuf.data(), lanes);
        eval_field(xs, u_mid, tbuf.data(), k2);
        for (std::size_t j = 0; j < n; ++j) {
            kt.axpy(0.5 * h, x[j].data(), k2[j].data(), xs[j].data(), lanes);
        }
        eval_field(xs, u_mid, tbuf.data(), k3);
        for (std::size_t j = 0; j < n; ++j) {
            kt.axpy(h, x[j].data(), k3[j].data(), xs[j].data(), lanes);
        }
        kt.fill(t_next, tbuf.data(), lanes);
        eval_field(xs, u_end, tbuf.data(), k4);
        for (std::size_t j = 0; j < n; ++j) {
            kt.rk4_combine(h, x[j].data(), k1[j].data(), k2[j].data(), k3[j].data(),
                           k4[j].data(), x[j].data(), lanes);
        }

        // Domain errors truncate like blowups; frozen lanes keep their last
        // valid state so downstream evaluations stay finite.
        for (std::size_t l = 0; l < lanes; ++l) {
            if (out.trunc_step[l] != kAlive) {
                for (std::size_t j = 0; j < n; ++j) x[j][l] = frozen[j * lanes + l];
            } else if (bad[l]) {
                out.trunc_step[l] = i + 1;
                for (std::size_t j = 0; j < n; ++j) {
                    frozen[j * lanes + l] = prev[j * lanes + l];
                    x[j][l] = prev[j * lanes + l];
                }
            }
        }
        observe(i + 1);
    }
    return out;
}

}  // namespace

Trajectory integrate(const InterconnectionSpec& spec, std::span<const double> x0,
                     const InputSignal& u, double t_end, double h, double blowup_threshold) {
    if (x0.size() != spec.n()) throw DimensionMismatchError(spec.n(), x0.size());
    Trajectory traj;
    traj.h = h;
    traj.state_dim = spec.n();
    traj.input_used = u;

    StepRecorder recorder = [&](std::size_t idx,
                                const std::vector<std::vector<double>>& cols) {
        traj.times.push_back(h * static_cast<double>(idx));
        for (std::size_t j = 0; j < cols.size(); ++j) traj.states.push_back(cols[j][0]);
    };
    EnsembleRaw raw = run_ensemble(spec, x0, std::span<const InputSignal>(&u, 1), t_end, h,
                                   blowup_threshold, 0.5, nullptr, 0, recorder);
    if (raw.trunc_step[0] != kAlive) {
        traj.truncated_at_blowup = true;
        traj.times.resize(raw.trunc_step[0]);
        traj.states.resize(raw.trunc_step[0] * traj.state_dim);
    }
    return traj;
}

double estimate_limsup(const Trajectory& traj, double tail_fraction) {
    if (!(tail_fraction > 0.0) || tail_fraction > 0.5) {
        throw Error("tail_fraction must lie in (0, 0.5]");
    }
    if (traj.truncated_at_blowup) throw TruncatedTrajectoryError();
    const std::size_t count = traj.times.size();
    if (count == 0) throw Error("empty trajectory");
    const std::size_t tail_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(count))));
    double best = 0.0;
    for (std::size_t i = count - tail_count; i < count; ++i) {
        best = std::max(best, norm2_of(traj.state_at(i)));
    }
    return best;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    const std::size_t n = traj.state_dim;
    const std::size_t m = traj.input_used.dim();
    os << "t";
    for (std::size_t j = 1; j <= n; ++j) os << ",x" << j;
    for (std::size_t c = 1; c <= m; ++c) os << ",u" << c;
    os << "\n";
    char buf[32];
    std::vector<double> u(m);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", traj.times[i]);
        os << buf;
        auto row = traj.state_at(i);
        for (std::size_t j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
            os << ',' << buf;
        }
        traj.input_used.sample(traj.times[i], u);
        for (std::size_t c = 0; c < m; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", u[c]);
            os << ',' << buf;
        }
        os << "\n";
    }
}

namespace {

InputSignal make_signal(InputKind kind, double level, std::size_t m, double sin_frequency,
                        double pcr_dwell, std::uint64_t run_seed, std::mt19937_64& rng) {
    if (m == 0 || level == 0.0) return InputSignal::zero(m);
    switch (kind) {
        case InputKind::Zero:
            return InputSignal::zero(m);
        case InputKind::Constant:
        case InputKind::Sinusoid: {
            // Per-run random direction on the unit sphere, scaled to the level.
            std::normal_distribution<double> gauss(0.0, 1.0);
            std::vector<double> dir(m);
            double norm = 0.0;
            while (norm == 0.0) {
                for (std::size_t c = 0; c < m; ++c) dir[c] = gauss(rng);
                norm = norm2_of(dir);
            }
            for (std::size_t c = 0; c < m; ++c) dir[c] *= level / norm;
            return kind == InputKind::Constant
                       ? InputSignal::constant(std::move(dir))
                       : InputSignal::sinusoid(std::move(dir), sin_frequency, 0.0);
        }
        case InputKind::PiecewiseConstantRandom:
            return InputSignal::piecewise_constant_random(level, pcr_dwell, run_seed, m);
    }
    return InputSignal::zero(m);
}

double box_radius_cap(const Box& box) {
    double acc = 0.0;
    for (const auto& [lo, hi] : box) {
        acc += std::max(lo * lo, hi * hi);
    }
    return 2.0 * std::sqrt(acc);
}

/// Largest r in (0, cap] with V(r * e_axis_dir) <= delta, by coarse scan plus
/// a safety margin; used only as a sampling superset.
double level_crossing(const StorageFn& v, std::size_t axis, double dir, double delta,
                      double cap) {
    constexpr std::size_t kScan = 512;
    std::vector<double> x(v.dim(), 0.0);
    double best = 0.0;
    for (std::size_t k = 1; k <= kScan; ++k) {
        const double r = cap * static_cast<double>(k) / static_cast<double>(kScan);
        x[axis] = dir * r;
        bool inside = false;
        try {
            inside = v(x) <= delta;
        } catch (const DomainError&) {
            inside = false;
        }
        if (inside) best = r;
    }
    return std::min(cap, best + cap / static_cast<double>(kScan));
}

Box region_bounding_box(const InterconnectionSpec& spec, const RegionSpec& region,
                        double cap, const Box& clamp) {
    const std::size_t n = spec.n();
    Box box(n);
    if (region.b_infinite) {
        if (clamp.size() != n) {
            throw Error("B_k is the whole space; an ic_box is required for sampling");
        }
        return clamp;
    }
    for (std::size_t a = 0; a < spec.n1(); ++a) {
        box[a] = {-level_crossing(spec.v1(), a, -1.0, region.b_threshold_v1, cap),
                  level_crossing(spec.v1(), a, 1.0, region.b_threshold_v1, cap)};
    }
    for (std::size_t a = 0; a < spec.n2(); ++a) {
        box[spec.n1() + a] = {
            -level_crossing(spec.v2(), a, -1.0, region.b_threshold_v2, cap),
            level_crossing(spec.v2(), a, 1.0, region.b_threshold_v2, cap)};
    }
    if (clamp.size() == n) {
        for (std::size_t a = 0; a < n; ++a) {
            box[a].first = std::max(box[a].first, clamp[a].first);
            box[a].second = std::min(box[a].second, clamp[a].second);
        }
    }
    return box;
}

/// Distance from p to the sublevel set {V <= delta}, measured along the ray
/// toward the origin (which always belongs to the set) and refined by
/// bisection on the membership indicator down to `resolution`. Exact for
/// norm-like storage functions; an upper bound in general.
double distance_to_sublevel(const StorageFn& v, double delta, std::span<const double> p,
                            double resolution) {
    const double pnorm = norm2_of(p);
    if (pnorm == 0.0) return 0.0;
    if (v(p) <= delta) return 0.0;
    double lo = 0.0, hi = 1.0;  // fractions of |p| along the ray; lo inside
    std::vector<double> q(p.size());
    while ((hi - lo) * pnorm > resolution) {
        const double mid = 0.5 * (lo + hi);
        for (std::size_t a = 0; a < p.size(); ++a) q[a] = mid * p[a];
        if (v(q) <= delta) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return (1.0 - lo) * pnorm;
}

double distance_to_a_region(const InterconnectionSpec& spec, const RegionSpec& region,
                            std::span<const double> p, double resolution) {
    const auto x1 = p.subspan(0, spec.n1());
    const auto x2 = p.subspan(spec.n1());
    const double d1 = distance_to_sublevel(spec.v1(), region.a_threshold_v1, x1, resolution);
    const double d2 = distance_to_sublevel(spec.v2(), region.a_threshold_v2, x2, resolution);
    return std::hypot(d1, d2);
}

}  // namespace

Theorem1Report check_theorem1(const InterconnectionSpec& spec,
                              const SmallGainIntervals& intervals, std::size_t k,
                              const Theorem1Params& params) {
    if (k == 0 || k > intervals.ell()) throw Error("check_theorem1: k out of range");
    if (params.n_samples == 0) throw Error("check_theorem1 needs n_samples > 0");

    const RegionSpec region =
        build_region(k, intervals, spec.gamma12(), spec.gamma21(), params.composition);
    const Box bbox = region_bounding_box(spec, region, params.bounding_cap, params.ic_box);
    const double radius_cap =
        params.radius_cap > 0.0 ? params.radius_cap : box_radius_cap(bbox);

    Theorem1Report report;
    report.k = k;
    const std::size_t n = spec.n();
    const bool delta_limited = k == intervals.ell() && !region.b_infinite;

    struct LevelData {
        double sup_norm;
        std::vector<double> distances;  // +inf for blowups
        std::size_t blowups = 0, escapes = 0;
    };
    std::vector<LevelData> data;

    for (std::size_t li = 0; li < params.u_levels.size(); ++li) {
        const double level = params.u_levels[li];
        Theorem1LevelStats stats;
        stats.sup_norm = level;
        if (delta_limited && level > params.input_delta_max) {
            stats.skipped_by_delta = true;
            report.levels.push_back(stats);
            report.notes.push_back("level " + std::to_string(level) +
                                   " skipped: finite last interval bounds admissible inputs");
            continue;
        }

        std::vector<double> x0(params.n_samples * n);
        std::vector<InputSignal> signals;
        signals.reserve(params.n_samples);
        for (std::size_t r = 0; r < params.n_samples; ++r) {
            const std::uint64_t run_seed = detail::derive_seed(params.seed, li, r);
            std::mt19937_64 rng(run_seed);
            bool accepted = false;
            std::vector<double> candidate(n);
            for (std::size_t attempt = 0; attempt < params.rejection_budget; ++attempt) {
                for (std::size_t a = 0; a < n; ++a) {
                    std::uniform_real_distribution<double> dist(bbox[a].first, bbox[a].second);
                    candidate[a] = dist(rng);
                }
                if (in_b_region(region, spec.v1(), spec.v2(), candidate)) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) {
                throw EmptyRegionError("no B_" + std::to_string(k) +
                                       " member found within the rejection budget");
            }
            std::copy(candidate.begin(), candidate.end(), x0.begin() + r * n);
            signals.push_back(make_signal(params.u_kind, level, spec.m(),
                                          params.sin_frequency, params.pcr_dwell, run_seed,
                                          rng));
        }

        EnsembleRaw raw =
            run_ensemble(spec, x0, signals, params.t_end, params.h,
                         params.blowup_threshold, params.tail_fraction, &region,
                         std::max<std::size_t>(1, params.tail_snapshots));

        LevelData level_data;
        level_data.sup_norm = level;
        const std::size_t s_count = raw.snapshot_indices.size();
        std::vector<double> snap(n);
        for (std::size_t r = 0; r < params.n_samples; ++r) {
            if (raw.escaped[r]) ++level_data.escapes;
            if (raw.trunc_step[r] != kAlive) {
                ++level_data.blowups;
                level_data.distances.push_back(std::numeric_limits<double>::infinity());
                continue;
            }
            double worst = 0.0;
            for (std::size_t s = 0; s < s_count; ++s) {
                const double* src = raw.snapshots.data() + r * s_count * n + s * n;
                std::copy(src, src + n, snap.begin());
                worst = std::max(worst, distance_to_a_region(spec, region, snap,
                                                             params.dist_resolution));
            }
            level_data.distances.push_back(worst);
        }
        stats.runs = params.n_samples;
        stats.blowups = level_data.blowups;
        stats.escapes = level_data.escapes;
        report.levels.push_back(stats);
        data.push_back(std::move(level_data));
    }

    // Monotone radius envelope over qualifying runs, then the within-fraction.
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return data[a].sup_norm < data[b].sup_norm; });
    std::vector<double> envelope(data.size(), 0.0);
    double running = 0.0;
    for (std::size_t oi : order) {
        double level_max = 0.0;
        for (double d : data[oi].distances) {
            if (std::isfinite(d) && d <= radius_cap) level_max = std::max(level_max, d);
        }
        running = std::max(running, level_max);
        envelope[oi] = running;
        report.radius_envelope.emplace_back(data[oi].sup_norm, running);
    }

    std::size_t total = 0, within = 0;
    std::size_t stats_idx = 0;
    for (std::size_t di = 0; di < data.size(); ++di) {
        while (report.levels[stats_idx].skipped_by_delta) ++stats_idx;
        Theorem1LevelStats& stats = report.levels[stats_idx++];
        double level_max = 0.0;
        for (double d : data[di].distances) {
            ++total;
            if (std::isfinite(d) && d <= radius_cap && d <= envelope[di]) {
                ++within;
                ++stats.converged;
            }
            if (std::isfinite(d)) level_max = std::max(level_max, d);
        }
        stats.max_tail_distance = level_max;
        if (stats.blowups == stats.runs) {
            stats.max_tail_distance = std::numeric_limits<double>::infinity();
        }
    }
    report.fraction_within =
        total == 0 ? 0.0 : static_cast<double>(within) / static_cast<double>(total);
    return report;
}

AissReport monte_carlo_aiss(const InterconnectionSpec& spec, const AissParams& params) {
    if (params.n_runs < 100) throw Error("monte_carlo_aiss requires n_runs >= 100");
    if (params.ic_box.size() != spec.n()) {
        throw DimensionMismatchError(spec.n(), params.ic_box.size());
    }
    const std::size_t n = spec.n();
    const double radius_cap =
        params.radius_cap > 0.0 ? params.radius_cap : box_radius_cap(params.ic_box);

    AissReport report;
    report.seed = params.seed;
    report.radius_cap = radius_cap;

    struct LevelData {
        double sup_norm = 0.0;
        std::vector<double> limsups;  // NaN for blowups
        std::vector<std::uint64_t> run_seeds;
        std::size_t blowups = 0;
    };
    std::vector<LevelData> data(params.u_levels.size());

    for (std::size_t li = 0; li < params.u_levels.size(); ++li) {
        const double level = params.u_levels[li];
        std::vector<double> x0(params.n_runs * n);
        std::vector<InputSignal> signals;
        signals.reserve(params.n_runs);
        LevelData& ld = data[li];
        for (std::size_t r = 0; r < params.n_runs; ++r) {
            const std::uint64_t run_seed = detail::derive_seed(params.seed, li, r);
            ld.run_seeds.push_back(run_seed);
            std::mt19937_64 rng(run_seed);
            for (std::size_t a = 0; a < n; ++a) {
                std::uniform_real_distribution<double> dist(params.ic_box[a].first,
                                                            params.ic_box[a].second);
                x0[r * n + a] = dist(rng);
            }
            signals.push_back(make_signal(params.u_kind, level, spec.m(),
                                          params.sin_frequency, params.pcr_dwell, run_seed,
                                          rng));
        }
        ld.sup_norm = signals.empty() ? level : signals.front().sup_norm();

        EnsembleRaw raw = run_ensemble(spec, x0, signals, params.t_end, params.h,
                                       params.blowup_threshold, params.tail_fraction,
                                       nullptr, 0);
        for (std::size_t r = 0; r < params.n_runs; ++r) {
            if (raw.trunc_step[r] != kAlive) {
                ++ld.blowups;
                ld.limsups.push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
                ld.limsups.push_back(raw.tail_max[r]);
            }
        }
    }

    // Envelope: per-level max over qualifying runs, monotone in |u|_inf.
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return data[a].sup_norm < data[b].sup_norm; });
    std::vector<double> envelope(data.size(), 0.0);
    double running = 0.0;
    for (std::size_t oi : order) {
        double level_max = 0.0;
        for (double v : data[oi].limsups) {
            if (std::isfinite(v) && v <= radius_cap) level_max = std::max(level_max, v);
        }
        running = std::max(running, level_max);
        envelope[oi] = running;
    }
    for (std::size_t oi : order) {
        report.empirical_gain_points.emplace_back(data[oi].sup_norm, envelope[oi]);
    }

    std::size_t converged_total = 0;
    for (std::size_t li = 0; li < data.size(); ++li) {
        const LevelData& ld = data[li];
        AissLevelStats stats;
        stats.sup_norm = ld.sup_norm;
        stats.runs = params.n_runs;
        stats.blowups = ld.blowups;
        stats.envelope = envelope[li];
        for (std::size_t r = 0; r < params.n_runs; ++r) {
            const double v = ld.limsups[r];
            report.n_runs += 1;
            if (std::isnan(v)) {
                report.nonconverged.push_back(
                    {li, ld.sup_norm, r, ld.run_seeds[r], "blowup", v});
            } else if (v > radius_cap || v > envelope[li]) {
                report.nonconverged.push_back(
                    {li, ld.sup_norm, r, ld.run_seeds[r], "limsup_above_cap", v});
            } else {
                ++stats.converged;
                ++converged_total;
            }
        }
        report.levels.push_back(stats);
    }
    report.fraction_converged =
        report.n_runs == 0
            ? 0.0
            : static_cast<double>(converged_total) / static_cast<double>(report.n_runs);
    return report;
}

}  // namespace smallgain
