#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "smallgain/system.hpp"

namespace smallgain {

inline constexpr std::size_t kMaxStoredViolations = 64;

struct Violation {
    std::vector<double> point;  // sampled point, layout documented per check
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // negative for violations
};

/// Outcome of a sampled inequality check. A point passes when its margin
/// (slack-adjusted rhs minus lhs, oriented so >= 0 is good) is nonnegative.
/// Only the first kMaxStoredViolations offenders are stored; violation_count
/// has the full tally.
struct CheckReport {
    std::string name;
    std::size_t checked_points = 0;
    std::size_t skipped_points = 0;
    std::size_t violation_count = 0;
    std::vector<Violation> violations;
    double min_margin = std::numeric_limits<double>::infinity();
    std::vector<std::string> notes;

    bool passed() const { return violation_count == 0; }
    void record(const std::vector<double>& point, double lhs, double rhs, double margin);
};

/// Margin s - gamma12(gamma21(s)) at interior samples of a finite interval;
/// endpoints are excluded (the margin vanishes there by construction).
/// Violation layout: point = {s}.
CheckReport check_sgc_on_interval(const ComparisonFn& gamma12, const ComparisonFn& gamma21,
                                  std::pair<double, double> interval, std::size_t samples);

struct LyapunovCheckParams {
    std::size_t samples = 10000;
    Box x_box;              // full state, n entries
    Box u_box;              // full input, m entries (subsystem slice is used)
    double fd_step = 1e-5;
    double fd_slack = 1e-6;
    double nondiff_tol = 1e-2;  // one-sided difference disagreement cutoff
    std::uint64_t seed = 1;
};

/// Sampled dissipation check for subsystem i (1 or 2): wherever the trigger
/// V_i(x_i) >= max{gamma_ij(V_j(x_j)), gamma_i(|u_i|)} holds, the certificate
/// requires grad V_i . f_i <= -alpha_i(|x_i|) + fd_slack. Gradients use
/// central differences with per-axis step fd_step * max(1, |x_axis|); points
/// where one-sided differences disagree by more than nondiff_tol are skipped
/// as nondifferentiable (the certificate only holds almost everywhere).
/// Violation layout: point = {x1..xn, u_i components}.
CheckReport check_iss_lyapunov(const InterconnectionSpec& spec, int subsystem,
                               const LyapunovCheckParams& params);

struct DpiCheckParams {
    std::vector<std::size_t> grid;  // per-axis counts, >= 8 each
    double fd_step = 1e-5;
    double fd_slack = 1e-6;
    std::vector<std::vector<double>> u_values = {{}};  // defaults to u = 0
};

/// Density propagation check over a regular grid on the block's box: where
/// max_i V_i(x_i) >= gamma_k(|u|), require div(rho f)(x, u) >= q(x) -
/// fd_slack, with the divergence computed by central differences of
/// rho * f_j along each axis. Violation layout: point = {x1..xn, u1..um}.
CheckReport check_dpi(const InterconnectionSpec& spec, const DpiBlock& block,
                      const DpiCheckParams& params);

/// Sign sampling of the block's certificate data: rho > 0 everywhere on the
/// grid and q >= 0 everywhere; grid points with q == 0 are surfaced as notes
/// (the "almost everywhere" exception list), not violations.
CheckReport check_dpi_block_invariants(const InterconnectionSpec& spec, const DpiBlock& block,
                                       const std::vector<std::size_t>& grid);

/// Sampled containment {A_k \ B_{k-1}} inside D_k, where D_k is the union of
/// the domain boxes of every block sharing index k (an annular region needs
/// several boxes). Points are drawn from the union's bounding box inflated by
/// `inflate`; members of A_k \ B_{k-1} lying in no box are violations.
/// a_region is empty for k = ell + 1 (A is the whole space); b_prev is empty
/// for k = 1 (B_0 is empty).
CheckReport check_dpi_containment(const InterconnectionSpec& spec, std::size_t k,
                                  std::span<const Box> boxes,
                                  const std::optional<RegionSpec>& a_region,
                                  const std::optional<RegionSpec>& b_prev,
                                  std::size_t samples, double inflate, std::uint64_t seed);

}  // namespace smallgain
