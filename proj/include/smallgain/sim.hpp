#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/system.hpp"
#include "smallgain/verify.hpp"

namespace smallgain {

enum class InputKind { Zero, Constant, Sinusoid, PiecewiseConstantRandom };

/// Measurable essentially bounded input signal with a known sup norm.
/// Sampling is a pure function of time (piecewise-constant-random draws are
/// derived from the window index), so signals are concurrency-safe and
/// reproducible.
class InputSignal {
public:
    InputSignal() = default;  // zero signal of dimension 0

    static InputSignal zero(std::size_t m);
    static InputSignal constant(std::vector<double> levels);
    static InputSignal sinusoid(std::vector<double> amplitude, double frequency, double phase);
    /// Per-window values drawn uniformly from the L2 ball of the given
    /// radius; dwell is the window length.
    static InputSignal piecewise_constant_random(double amplitude, double dwell,
                                                 std::uint64_t seed, std::size_t m);

    void sample(double t, std::span<double> out) const;

    InputKind kind() const { return kind_; }
    std::size_t dim() const { return dim_; }
    double sup_norm() const { return sup_norm_; }
    std::string describe() const;

private:
    InputKind kind_ = InputKind::Zero;
    std::size_t dim_ = 0;
    double sup_norm_ = 0.0;
    std::vector<double> values_;  // constant levels / sinusoid amplitudes
    double frequency_ = 0.0;
    double phase_ = 0.0;
    double amplitude_ = 0.0;  // piecewise-constant-random ball radius
    double dwell_ = 0.0;
    std::uint64_t seed_ = 0;
};

/// Fixed-step sampled solution. Times are i*h; states are row-major
/// (times.size() x state_dim). When truncated_at_blowup is set the stored
/// rows end at the last state before the blowup (all stored states finite).
struct Trajectory {
    double h = 0.0;
    std::size_t state_dim = 0;
    std::vector<double> times;
    std::vector<double> states;
    InputSignal input_used;
    bool truncated_at_blowup = false;

    std::span<const double> state_at(std::size_t i) const {
        return {states.data() + i * state_dim, state_dim};
    }
};

inline constexpr double kDefaultBlowupThreshold = 1e8;

/// Classical fixed-step RK4 with the input sampled at stage times.
/// Expression domain errors truncate the run like a blowup does.
Trajectory integrate(const InterconnectionSpec& spec, std::span<const double> x0,
                     const InputSignal& u, double t_end, double h,
                     double blowup_threshold = kDefaultBlowupThreshold);

/// max |x(t)| over the final tail_fraction of the time grid
/// (0 < tail_fraction <= 0.5). Throws TruncatedTrajectoryError.
double estimate_limsup(const Trajectory& traj, double tail_fraction);

/// CSV rows `t,x1,...,xn,u1,...,um`, one per step.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

struct Theorem1Params {
    std::size_t n_samples = 50;
    std::vector<double> u_levels = {0.0};
    InputKind u_kind = InputKind::Constant;
    double sin_frequency = 0.5;
    double pcr_dwell = 1.0;
    double t_end = 20.0;
    double h = 1e-3;
    std::uint64_t seed = 1;
    double tail_fraction = 0.2;
    double blowup_threshold = kDefaultBlowupThreshold;
    Box ic_box;  // sampling box when B_k is the whole space; also a clamp
    double bounding_cap = 1e3;  // search range for level-set bounding boxes
    double input_delta_max = std::numeric_limits<double>::infinity();
    InnerComposition composition = InnerComposition::AsPrinted;
    double radius_cap = 0.0;     // <= 0: derived from the sampling box
    double dist_resolution = 1e-3;
    std::size_t dist_max_shells = 2000;
    std::size_t tail_snapshots = 17;
    std::size_t rejection_budget = 1000;  // attempts per accepted sample
};

struct Theorem1LevelStats {
    double sup_norm = 0.0;
    std::size_t runs = 0;
    std::size_t converged = 0;
    std::size_t blowups = 0;
    std::size_t escapes = 0;  // trajectories leaving B_k
    double max_tail_distance = 0.0;
    bool skipped_by_delta = false;
};

struct Theorem1Report {
    std::size_t k = 0;
    std::vector<Theorem1LevelStats> levels;
    std::vector<std::pair<double, double>> radius_envelope;  // (|u|_inf, radius)
    double fraction_within = 0.0;
    std::vector<std::string> notes;

    bool passed() const { return fraction_within == 1.0; }
};

/// Sample initial conditions in B_k (rejection sampling over a numeric
/// bounding box), integrate, and measure how far trajectory tails end up
/// from A_k. When the last interval has a finite upper endpoint the
/// convergence only holds for bounded inputs, so levels above
/// input_delta_max are skipped for k == ell. Throws EmptyRegionError when no
/// B_k member is found within the attempt budget.
Theorem1Report check_theorem1(const InterconnectionSpec& spec,
                              const SmallGainIntervals& intervals, std::size_t k,
                              const Theorem1Params& params);

struct AissParams {
    std::size_t n_runs = 500;
    Box ic_box;
    std::vector<double> u_levels = {0.0};
    InputKind u_kind = InputKind::Constant;
    double sin_frequency = 0.5;
    double pcr_dwell = 1.0;
    double t_end = 20.0;
    double h = 1e-3;
    std::uint64_t seed = 1;
    double tail_fraction = 0.2;
    double blowup_threshold = kDefaultBlowupThreshold;
    double radius_cap = 0.0;  // <= 0: derived from ic_box
};

struct NonConvergedRun {
    std::size_t level_index = 0;
    double sup_norm = 0.0;
    std::size_t run_index = 0;
    std::uint64_t derived_seed = 0;  // reproduces the run's draws exactly
    std::string reason;              // "blowup" | "limsup_above_cap"
    double limsup = 0.0;             // NaN for blowups
};

struct AissLevelStats {
    double sup_norm = 0.0;
    std::size_t runs = 0;
    std::size_t converged = 0;
    std::size_t blowups = 0;
    double envelope = 0.0;  // monotone radius at this level
};

struct AissReport {
    std::size_t n_runs = 0;  // total across levels
    double fraction_converged = 0.0;
    std::vector<std::pair<double, double>> empirical_gain_points;  // (|u|_inf, envelope)
    std::vector<NonConvergedRun> nonconverged;
    std::vector<AissLevelStats> levels;
    double radius_cap = 0.0;
    std::uint64_t seed = 0;
};

/// Monte-Carlo sweep over initial conditions and input levels. A run
/// converges when its limsup estimate stays below the monotone empirical
/// envelope, which is anchored by radius_cap so runaway trajectories can
/// never inflate it. The envelope doubles as the empirical surrogate of the
/// unconstructed theoretical gain.
AissReport monte_carlo_aiss(const InterconnectionSpec& spec, const AissParams& params);

}  // namespace smallgain
